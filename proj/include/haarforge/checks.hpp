// Copyright 2026 The HaarForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HAARFORGE_CHECKS_HPP
#define HAARFORGE_CHECKS_HPP

#include "haarforge/interpolation.hpp"
#include "haarforge/irrep_basis.hpp"
#include "haarforge/moment_lab.hpp"

namespace haarforge {

struct CheckResult {
    std::string name;
    bool pass = false;
    json detail = json::object();

    json to_json() const {
        json j = detail;
        j["check"] = name;
        j["pass"] = pass;
        return j;
    }
};

/// Dense O_{P2} O_{P1} == N^d O_{P2 P1} over all diagram pairs, exact integers.
inline CheckResult check_diagram_mult(int k, int N) {
    auto ds = enumerate_diagrams(k);
    std::vector<IntMatrix> dense;
    for (const auto &d : ds) dense.push_back(dense_realize_int(d, N));
    CheckResult r{"diagram_mult"};
    uint64_t failures = 0, pairs = 0;
    json dumps = json::array();
    for (size_t a = 0; a < ds.size(); a++) {
        for (size_t b = 0; b < ds.size(); b++) {
            pairs++;
            DiagramProduct pr = multiply(ds[a], ds[b]);
            IntMatrix lhs = dense[a] * dense[b];
            IntMatrix rhs = dense_realize_int(pr.diagram, N) * (int64_t)ipow((uint64_t)N, (unsigned)pr.d);
            if (lhs != rhs) {
                failures++;
                if (dumps.size() < 5) {
                    dumps.push_back({{"p2", ds[a].to_json()}, {"p1", ds[b].to_json()}, {"product", pr.diagram.to_json()},
                                     {"d", pr.d}});
                }
            }
        }
    }
    r.pass = failures == 0;
    r.detail = {{"k", k}, {"N", N}, {"pairs", pairs}, {"failures", failures}, {"counterexamples", dumps}};
    return r;
}

/// K K^-1 == I and O_P == sum_{P' >= P} O'_{P'} densely, exact integers.
inline CheckResult check_diagram_mobius(int k, int N) {
    MobiusData md = mobius_matrices(k);
    SparseIntMatrix prod = sparse_multiply(md.K, md.K_inv);
    bool identity = true;
    for (size_t i = 0; i < prod.n; i++) {
        for (const auto &[c, v] : prod.rows[i]) {
            if ((c == i && v != 1) || (c != i && v != 0)) identity = false;
        }
        bool has_diag = false;
        for (const auto &[c, v] : prod.rows[i]) has_diag |= (c == i && v == 1);
        identity &= has_diag;
    }
    std::vector<IntMatrix> distinct;
    for (const auto &p : md.order) distinct.push_back(dense_realize_distinct_int(SetPartitionDiagram(k, p), N));
    uint64_t failures = 0;
    json dumps = json::array();
    for (size_t i = 0; i < md.order.size(); i++) {
        IntMatrix sum = IntMatrix::Zero(distinct[i].rows(), distinct[i].cols());
        for (const auto &[j, one] : md.K.rows[i]) sum += distinct[j];
        if (sum != dense_realize_int(SetPartitionDiagram(k, md.order[i]), N)) {
            failures++;
            if (dumps.size() < 5) dumps.push_back(SetPartitionDiagram(k, md.order[i]).to_json());
        }
    }
    CheckResult r{"diagram_mobius"};
    r.pass = identity && failures == 0;
    r.detail = {{"k", k}, {"N", N}, {"partitions", md.order.size()}, {"K_Kinv_identity", identity},
                {"reconstruction_failures", failures}, {"counterexamples", dumps}};
    return r;
}

/// Gram rank of the vectorized diagram operators against Bell(2k): full iff N >= 2k.
inline CheckResult check_diagram_rank(int k, int N) {
    int rank = diagram_gram_rank(k, N);
    auto bell = (int)bell_number(2 * k);
    json d = {{"k", k}, {"N", N}, {"rank", rank}, {"bell", bell}};
    bool ok = (rank == bell) == (N >= 2 * k);
    if (ipow_sat((uint64_t)N, (unsigned)(2 * k)) <= 1u << 16) {
        int dr = diagram_gram_rank_dense(k, N);
        d["rank_dense"] = dr;
        ok &= dr == rank;
    }
    CheckResult r{"diagram_rank"};
    r.pass = ok;
    r.detail = d;
    return r;
}

/// moment_projector_perm: idempotent, self-adjoint, and equal to the exhaustive S(N) average for N <= 6.
inline CheckResult check_projector(int k, int N) {
    MomentOperator P = moment_projector_perm(k, N);
    double idem = max_abs_entry(P.matrix * P.matrix - P.matrix);
    double herm = hermiticity_defect(P.matrix);
    json d = {{"k", k}, {"N", N}, {"idempotency_defect", idem}, {"hermiticity_defect", herm}};
    bool ok = idem <= 1e-10 && herm <= 1e-10;
    if (N <= 6) {
        std::vector<DenseOperator> members;
        for (const auto &p : all_permutations((size_t)N)) members.push_back(p.dense().cast<Complex>());
        MomentOperator avg = ensemble_moment_operator(members, k);
        double diff = max_abs_entry(avg.matrix - P.matrix);
        d["exhaustive_max_diff"] = diff;
        ok &= diff <= 1e-12;
    }
    CheckResult r{"moment_projector"};
    r.pass = ok;
    r.detail = d;
    return r;
}

/// Residues of the exponent sum mod M give sum c_r w^r, exactly zero iff c_r == c_{r + M/2}.
inline bool root_sum_vanishes(const std::vector<uint64_t> &counts) {
    size_t M = counts.size();
    if (M % 2) {
        throw DomainError("root_sum_vanishes: modulus must be even");
    }
    for (size_t r = 0; r < M / 2; r++) {
        if (counts[r] != counts[r + M / 2]) return false;
    }
    return true;
}

/// Over all keys of the degree k'-1 family on GF(2^n) with modulus 2^n: E[prod p(x_j)^{q_j}] = 0
/// for up to k' distinct points, exponents 1 <= |q_j|, sum |q_j| <= 2k'. Exact integer test.
inline CheckResult check_kwise_phase_moments(int n, int kprime) {
    auto keys = KWiseFunctionFamily::enumerate(n, kprime);
    uint32_t M = 1u << n;
    uint64_t cases = 0, failures = 0;
    json dumps = json::array();
    std::vector<std::vector<uint32_t>> vals;
    for (const auto &key : keys) {
        std::vector<uint32_t> v(M);
        for (uint32_t x = 0; x < M; x++) v[x] = kwise_eval(key, x) & (M - 1);
        vals.push_back(std::move(v));
    }
    auto test = [&](const std::vector<uint32_t> &pts, const std::vector<int> &q) {
        std::vector<uint64_t> counts(M, 0);
        for (const auto &v : vals) {
            int64_t e = 0;
            for (size_t j = 0; j < pts.size(); j++) e += (int64_t)q[j] * v[pts[j]];
            counts[(size_t)(((e % M) + M) % M)]++;
        }
        cases++;
        if (!root_sum_vanishes(counts)) {
            failures++;
            if (dumps.size() < 5) dumps.push_back({{"points", pts}, {"exponents", q}});
        }
    };
    for (uint32_t a = 0; a < M; a++) {
        for (int q = 1; q <= 2 * kprime; q++) test({a}, {q});
    }
    if (kprime >= 2) {
        for (uint32_t a = 0; a < M; a++) {
            for (uint32_t b = a + 1; b < M; b++) {
                for (int qa = -kprime; qa <= kprime; qa++) {
                    for (int qb = -kprime; qb <= kprime; qb++) {
                        if (qa == 0 || qb == 0 || std::abs(qa) + std::abs(qb) > 2 * kprime) continue;
                        test({a, b}, {qa, qb});
                    }
                }
            }
        }
    }
    CheckResult r{"kwise_phase_moments"};
    r.pass = failures == 0;
    r.detail = {{"field_degree", n}, {"independence", kprime}, {"keys", keys.size()}, {"cases", cases},
                {"failures", failures}, {"counterexamples", dumps}};
    return r;
}

inline CheckResult check_kwise_l1_uniform(size_t N, size_t k) {
    auto rep = kwise_l1_report(all_permutations(N), k);
    CheckResult r{"kwise_l1_uniform"};
    r.pass = rep.max == 0.0;
    r.detail = {{"N", N}, {"k", k}, {"tuples", rep.tuples.size()}, {"max_l1", rep.max}};
    return r;
}

/// Weight normalization and bounds of the degree-d word expansion, plus its dense realization
/// against truncated_taylor of A_m on phased permutations of size N.
inline CheckResult check_word_weights(int m, double theta, int d, int N, StreamSeed seed) {
    WordCoefficients wc = expand_exponential(m, theta, d);
    WeightStats ws = weight_stats(wc);
    double v = std::abs(wc.identity_coeff);
    double total = ws.sum_sq + v * v;
    Rng rng = seed.at(0);
    std::vector<PhasedPermutation> zs;
    for (int a = 0; a < m; a++) zs.push_back(sample_phased_permutation((size_t)N, rng));
    DenseOperator dense = realize_expansion(wc, zs);
    DenseOperator ref = truncated_taylor(build_A_m(zs), theta, d);
    double match = max_abs_entry(dense - ref);
    CheckResult r{"word_weights"};
    bool norm_ok = std::abs(total - 1.0) <= 1e-6;
    bool max_ok = ws.max_abs <= 1.0 / std::sqrt(2.0) + 1e-9;
    bool v_ok = v <= 1e-3;
    bool match_ok = match <= 1e-9;
    r.pass = norm_ok && max_ok && v_ok && match_ok;
    r.detail = {{"m", m},
                {"theta", theta},
                {"degree", d},
                {"n_words", ws.n_words},
                {"sum_sq_plus_v_sq", total},
                {"normalization_ok", norm_ok},
                {"max_abs", ws.max_abs},
                {"max_abs_ok", max_ok},
                {"abs_v", v},
                {"abs_v_ok", v_ok},
                {"dense_vs_taylor", match},
                {"dense_match_ok", match_ok}};
    return r;
}

inline CheckResult check_irrep_basis(int k, const IntegerPartition &lambda_star, int N, double tol = 1e-8) {
    IrrepBasis ib = irrep_basis_small_k(k, lambda_star, N);
    auto n = ib.gram.rows();
    double dev = max_abs_entry(ib.gram - Eigen::MatrixXcd::Identity(n, n));
    double diag = 0;
    for (Eigen::Index i = 0; i < n; i++) diag = std::max(diag, std::abs(ib.gram(i, i) - 1.0));
    double resid = multiplicative_residual(k, lambda_star.size(), N);
    CheckResult r{"irrep_basis"};
    r.pass = dev <= tol && resid <= tol;
    r.detail = {{"k", k},
                {"lambda_star", lambda_star.parts},
                {"N", N},
                {"basis_size", n},
                {"gram_identity_deviation", dev},
                {"gram_diagonal_deviation", diag},
                {"multiplicative_residual", resid}};
    return r;
}

}  // namespace haarforge

#endif
