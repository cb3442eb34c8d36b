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

#ifndef HAARFORGE_MOMENT_LAB_HPP
#define HAARFORGE_MOMENT_LAB_HPP

#include <chrono>
#include <map>
#include <unordered_map>

#include "haarforge/free_words.hpp"
#include "haarforge/matrix_engine.hpp"
#include "haarforge/partition_algebra.hpp"
#include "haarforge/symmetric_group.hpp"

namespace haarforge {

using Sampler = std::function<DenseOperator(Rng &)>;

enum class NormKind { frobenius, spectral };

inline NormKind parse_norm_kind(const std::string &s) {
    if (s == "frobenius") return NormKind::frobenius;
    if (s == "spectral") return NormKind::spectral;
    throw DomainError("unknown norm kind: " + s);
}

struct Estimate {
    double value = 0;
    double std_error = 0;
    uint64_t n = 0;
};

struct ExperimentRecord {
    json config;
    std::string metric;
    double value = 0;
    double std_error = 0;
    uint64_t n_samples = 0;
    double wall_time = 0;
    json extra = json::object();

    json to_json() const {
        return json{{"config", config}, {"metric", metric}, {"value", value}, {"std_error", std_error},
                    {"n_samples", n_samples}, {"wall_time", wall_time}, {"extra", extra}};
    }
};

namespace detail {
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline DenseOperator kron(const DenseOperator &a, const DenseOperator &b) {
    DenseOperator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); r++) {
        for (Eigen::Index c = 0; c < a.cols(); c++) out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
    return out;
}

inline Estimate mean_and_se(const std::vector<double> &v) {
    Estimate e;
    e.n = v.size();
    KahanSum<double> s;
    for (double x : v) s.add(x);
    e.value = s.value() / (double)v.size();
    KahanSum<double> q;
    for (double x : v) q.add((x - e.value) * (x - e.value));
    double var = v.size() > 1 ? q.value() / (double)(v.size() - 1) : 0.0;
    e.std_error = std::sqrt(var / (double)v.size());
    return e;
}
}  // namespace detail

/// U^{(x)k} (x) conj(U)^{(x)k}.
inline DenseOperator moment_term(const DenseOperator &U, int k) {
    DenseOperator t = DenseOperator::Identity(1, 1);
    for (int i = 0; i < k; i++) t = detail::kron(t, U);
    DenseOperator ub = U.conjugate();
    for (int i = 0; i < k; i++) t = detail::kron(t, ub);
    return t;
}

// ---- Permutation-pair representation -------------------------------------------

/// M = sum_{sigma, tau} C[sigma][tau] |P_sigma)(P_tau| with Gram G = N^{#cyc(sigma^-1 tau)}.
struct PermutationPairMoment {
    int k = 1;
    int N = 1;
    std::vector<SmallPerm> perms;
    Eigen::MatrixXd C;
    Eigen::MatrixXd G;

    double frobenius_norm_sq() const {
        return (C * G * C.transpose() * G).trace();
    }
    double frobenius_norm() const {
        return std::sqrt(std::max(0.0, frobenius_norm_sq()));
    }

    /// Dense N^{2k} x N^{2k} superoperator (capped).
    MomentOperator to_dense() const {
        uint64_t D = ipow_sat((uint64_t)N, (unsigned)(2 * k));
        if (D > kDenseSideCap) {
            throw ResourceError("moment operator capped at N^{2k} <= 4096");
        }
        auto d = (Eigen::Index)D;
        auto side = (Eigen::Index)ipow((uint64_t)N, (unsigned)k);
        Eigen::MatrixXd X(d, (Eigen::Index)perms.size());
        std::vector<int> x((size_t)k), y((size_t)k);
        for (size_t s = 0; s < perms.size(); s++) {
            X.col((Eigen::Index)s).setZero();
            for (Eigen::Index c = 0; c < side; c++) {
                detail::decode_digits((uint64_t)c, N, k, x, 0);
                for (int a = 0; a < k; a++) y[(size_t)perms[s][(size_t)a]] = x[(size_t)a];
                uint64_t r = 0;
                for (int a = 0; a < k; a++) r = r * (uint64_t)N + (uint64_t)y[(size_t)a];
                X((Eigen::Index)r * side + c, (Eigen::Index)s) = 1.0;
            }
        }
        MomentOperator mo;
        mo.k = k;
        mo.N = N;
        mo.matrix = (X * C * X.transpose()).cast<Complex>();
        return mo;
    }
};

inline Eigen::MatrixXd permutation_gram(const std::vector<SmallPerm> &perms, int N) {
    auto n = (Eigen::Index)perms.size();
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index i = 0; i < n; i++) {
        for (Eigen::Index j = 0; j < n; j++) {
            G(i, j) = std::pow((double)N, perm_cycles(perm_compose(perm_inverse(perms[(size_t)i]), perms[(size_t)j])));
        }
    }
    return G;
}

/// Weingarten matrix: inverse of the permutation Gram, exact in rationals.
inline std::vector<std::vector<Rational>> weingarten_matrix(int k, int N) {
    if (k < 1 || k > 4) {
        throw DomainError("weingarten_matrix: need 1 <= k <= 4");
    }
    if (N < k) {
        throw DomainError("weingarten_matrix: Gram singular for N < k");
    }
    auto perms = all_small_perms(k);
    size_t n = perms.size();
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n, 0));
    for (size_t i = 0; i < n; i++) {
        for (size_t j = 0; j < n; j++) {
            a[i][j] = Rational(BigInt(1) * boost::multiprecision::pow(BigInt(N), (unsigned)perm_cycles(
                                                                       perm_compose(perm_inverse(perms[i]), perms[j]))));
        }
        a[i][n + i] = 1;
    }
    for (size_t c = 0; c < n; c++) {
        size_t piv = c;
        while (piv < n && a[piv][c] == 0) piv++;
        if (piv == n) {
            throw DomainError("weingarten_matrix: Gram singular");
        }
        std::swap(a[c], a[piv]);
        Rational inv = Rational(1) / a[c][c];
        for (auto &v : a[c]) v *= inv;
        for (size_t r = 0; r < n; r++) {
            if (r == c || a[r][c] == 0) continue;
            Rational f = a[r][c];
            for (size_t j = 0; j < 2 * n; j++) a[r][j] -= f * a[c][j];
        }
    }
    std::vector<std::vector<Rational>> w(n, std::vector<Rational>(n));
    for (size_t i = 0; i < n; i++) {
        for (size_t j = 0; j < n; j++) w[i][j] = a[i][n + j];
    }
    return w;
}

inline PermutationPairMoment haar_moment_structured(int k, int N) {
    auto W = weingarten_matrix(k, N);
    PermutationPairMoment pm;
    pm.k = k;
    pm.N = N;
    pm.perms = all_small_perms(k);
    auto n = (Eigen::Index)pm.perms.size();
    pm.C.resize(n, n);
    for (Eigen::Index i = 0; i < n; i++) {
        for (Eigen::Index j = 0; j < n; j++) pm.C(i, j) = static_cast<double>(W[(size_t)i][(size_t)j]);
    }
    pm.G = permutation_gram(pm.perms, N);
    return pm;
}

/// Ginibre: (1/N^k) sum_sigma |P_sigma)(P_sigma|.
inline PermutationPairMoment ginibre_moment_structured(int k, int N) {
    if (k < 1 || k > 4 || N < 1) {
        throw DomainError("ginibre_moment_structured: need 1 <= k <= 4, N >= 1");
    }
    PermutationPairMoment pm;
    pm.k = k;
    pm.N = N;
    pm.perms = all_small_perms(k);
    auto n = (Eigen::Index)pm.perms.size();
    pm.C = Eigen::MatrixXd::Identity(n, n) / std::pow((double)N, k);
    pm.G = permutation_gram(pm.perms, N);
    return pm;
}

inline double structured_inner(const PermutationPairMoment &a, const PermutationPairMoment &b) {
    require(a.k == b.k && a.N == b.N, "structured moments: shape mismatch");
    return (a.C.transpose() * a.G * b.C * b.G).trace();
}

inline double moment_distance(const PermutationPairMoment &a, const PermutationPairMoment &b, NormKind kind) {
    require(a.k == b.k && a.N == b.N, "moment_distance: shape mismatch");
    Eigen::MatrixXd D = a.C - b.C;
    if (kind == NormKind::frobenius) {
        return std::sqrt(std::max(0.0, (D * a.G * D.transpose() * a.G).trace()));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.G);
    Eigen::MatrixXd half = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(half * D * half);
    return svd.singularValues()(0);
}

inline MomentOperator haar_moment_operator(int k, int N) {
    return haar_moment_structured(k, N).to_dense();
}

/// Entry formula from Wick pairings:
/// M[(i,j),(i',j')] = N^{-k} sum_sigma prod_a [i_a = j_sigma(a)] [i'_a = j'_sigma(a)].
inline MomentOperator ginibre_moment_operator(int k, int N) {
    if (k > 3) {
        throw ResourceError("ginibre_moment_operator: k capped at 3");
    }
    uint64_t D = ipow_sat((uint64_t)N, (unsigned)(2 * k));
    if (D > kDenseSideCap) {
        throw ResourceError("moment operator capped at N^{2k} <= 4096");
    }
    auto perms = all_small_perms(k);
    MomentOperator mo;
    mo.k = k;
    mo.N = N;
    mo.matrix = DenseOperator::Zero((Eigen::Index)D, (Eigen::Index)D);
    double w = 1.0 / std::pow((double)N, k);
    std::vector<int> out((size_t)(2 * k)), in((size_t)(2 * k));
    for (uint64_t r = 0; r < D; r++) {
        detail::decode_digits(r, N, 2 * k, out, 0);
        for (uint64_t c = 0; c < D; c++) {
            detail::decode_digits(c, N, 2 * k, in, 0);
            int hits = 0;
            for (const auto &s : perms) {
                bool ok = true;
                for (int a = 0; a < k && ok; a++) {
                    ok = out[(size_t)a] == out[(size_t)(k + s[(size_t)a])] && in[(size_t)a] == in[(size_t)(k + s[(size_t)a])];
                }
                hits += ok;
            }
            if (hits) mo.matrix((Eigen::Index)r, (Eigen::Index)c) = hits * w;
        }
    }
    return mo;
}

inline double moment_distance(const MomentOperator &a, const MomentOperator &b, NormKind kind) {
    if (a.k != b.k || a.N != b.N || a.matrix.rows() != b.matrix.rows() || a.matrix.cols() != b.matrix.cols()) {
        throw DomainError("moment_distance: shape mismatch");
    }
    DenseOperator d = a.matrix - b.matrix;
    if (kind == NormKind::frobenius) {
        return d.norm();
    }
    if (d.rows() <= 1024) {
        Eigen::BDCSVD<DenseOperator> svd(d);
        return svd.singularValues()(0);
    }
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(d.adjoint() * d, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// ---- Monte Carlo --------------------------------------------------------------

struct McMoment {
    MomentOperator mean;
    Eigen::MatrixXd std_error;
    uint64_t n_samples = 0;
    int batches = 0;
};

/// Sample s draws from seed.at(s). Entrywise errors from batch means.
inline McMoment mc_moment_operator(const Sampler &sampler, int k, int N, uint64_t n_samples, StreamSeed seed) {
    if (n_samples < 2) {
        throw DomainError("mc_moment_operator: n_samples must be >= 2");
    }
    uint64_t D = ipow_sat((uint64_t)N, (unsigned)(2 * k));
    if (D > 1024) {
        throw ResourceError("mc_moment_operator: capped at N^{2k} <= 1024");
    }
    int B = (int)std::min<uint64_t>(n_samples, 20);
    std::vector<DenseOperator> sums((size_t)B);
    std::vector<uint64_t> counts((size_t)B);
    parallel_for((size_t)B, [&](size_t b) {
        uint64_t lo = n_samples * b / (uint64_t)B, hi = n_samples * (b + 1) / (uint64_t)B;
        DenseOperator acc = DenseOperator::Zero((Eigen::Index)D, (Eigen::Index)D);
        for (uint64_t s = lo; s < hi; s++) {
            Rng rng = seed.at(s);
            DenseOperator U = sampler(rng);
            if (U.rows() != N) {
                throw DomainError("sampler returned wrong dimension");
            }
            acc += moment_term(U, k);
        }
        sums[b] = std::move(acc);
        counts[b] = hi - lo;
    });
    McMoment out;
    out.n_samples = n_samples;
    out.batches = B;
    out.mean.k = k;
    out.mean.N = N;
    out.mean.matrix = DenseOperator::Zero((Eigen::Index)D, (Eigen::Index)D);
    for (int b = 0; b < B; b++) out.mean.matrix += sums[(size_t)b];
    out.mean.matrix /= (double)n_samples;
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero((Eigen::Index)D, (Eigen::Index)D);
    for (int b = 0; b < B; b++) {
        DenseOperator bm = sums[(size_t)b] / (double)counts[(size_t)b];
        var += (bm - out.mean.matrix).cwiseAbs2();
    }
    var /= (double)(B - 1) * B;
    out.std_error = var.cwiseSqrt();
    return out;
}

/// Exact mean over a finite ensemble with equal weights.
inline MomentOperator ensemble_moment_operator(const std::vector<DenseOperator> &members, int k) {
    require(!members.empty(), "empty ensemble");
    auto N = (int)members[0].rows();
    MomentOperator mo;
    mo.k = k;
    mo.N = N;
    mo.matrix = moment_term(members[0], k);
    for (size_t i = 1; i < members.size(); i++) mo.matrix += moment_term(members[i], k);
    mo.matrix /= (double)members.size();
    return mo;
}

/// Entry (row, col) of U^{(x)k} (x) conj(U)^{(x)k}, indices over N^{2k}.
inline Complex moment_term_entry(const DenseOperator &U, int k, uint64_t row, uint64_t col) {
    auto N = (int)U.rows();
    std::vector<int> r((size_t)(2 * k)), c((size_t)(2 * k));
    detail::decode_digits(row, N, 2 * k, r, 0);
    detail::decode_digits(col, N, 2 * k, c, 0);
    Complex v = 1.0;
    for (int a = 0; a < k; a++) v *= U(r[(size_t)a], c[(size_t)a]);
    for (int a = k; a < 2 * k; a++) v *= std::conj(U(r[(size_t)a], c[(size_t)a]));
    return v;
}

struct EntryEstimate {
    uint64_t row = 0, col = 0;
    Complex value;
    double std_error = 0;
};

/// Monte Carlo estimates of selected entries of the moment operator (no dense cap).
inline std::vector<EntryEstimate> mc_moment_entries(const Sampler &sampler, int k,
                                                    const std::vector<std::pair<uint64_t, uint64_t>> &entries,
                                                    uint64_t n_samples, StreamSeed seed) {
    if (n_samples < 2) {
        throw DomainError("mc_moment_entries: n_samples must be >= 2");
    }
    size_t E = entries.size();
    std::vector<std::vector<Complex>> vals(E, std::vector<Complex>(n_samples));
    parallel_for(n_samples, [&](size_t s) {
        Rng rng = seed.at(s);
        DenseOperator U = sampler(rng);
        for (size_t e = 0; e < E; e++) vals[e][s] = moment_term_entry(U, k, entries[e].first, entries[e].second);
    });
    std::vector<EntryEstimate> out;
    for (size_t e = 0; e < E; e++) {
        KahanSum<Complex> acc;
        for (const auto &v : vals[e]) acc.add(v);
        Complex mean = acc.value() / (double)n_samples;
        double q = 0;
        for (const auto &v : vals[e]) q += std::norm(v - mean);
        out.push_back({entries[e].first, entries[e].second, mean, std::sqrt(q / (double)(n_samples - 1) / (double)n_samples)});
    }
    return out;
}

/// E|tr(U^dagger V)|^{2k} over independent pairs; pair p uses samples 2p and 2p+1.
inline Estimate frame_potential(const Sampler &sampler, int k, uint64_t n_pairs, StreamSeed seed) {
    if (n_pairs < 2) {
        throw DomainError("frame_potential: n_pairs must be >= 2");
    }
    std::vector<double> v(n_pairs);
    parallel_for(n_pairs, [&](size_t p) {
        Rng r1 = seed.at(2 * p), r2 = seed.at(2 * p + 1);
        DenseOperator U = sampler(r1);
        DenseOperator V = sampler(r2);
        Complex t = (U.adjoint() * V).trace();
        v[p] = std::pow(std::norm(t), k);
    });
    return detail::mean_and_se(v);
}

struct PairStatistic {
    // d2 = ||M_sample - M_ref||_F^2 estimated without bias.
    Estimate d2;
    Estimate self_overlap;   // U-statistic of |tr(O_s^dagger O_t)|^{2k}, = ||M_sample||_F^2
    Estimate cross;          // mean of f_s, = tr(M_sample^dagger M_ref)
    double reference_norm_sq = 0;
    double distance = 0;
    double distance_se = 0;
};

/// Features f_s = sum C[sigma][tau] prod_{cycles c of sigma^-1 tau} tr((O^dagger O)^{|c|}).
inline double reference_feature(const PermutationPairMoment &ref, const std::vector<double> &trace_powers) {
    double f = 0;
    for (size_t i = 0; i < ref.perms.size(); i++) {
        for (size_t j = 0; j < ref.perms.size(); j++) {
            double c = ref.C((Eigen::Index)i, (Eigen::Index)j);
            if (c == 0) continue;
            double prod = 1;
            for (int len : perm_cycle_lengths(perm_compose(perm_inverse(ref.perms[i]), ref.perms[j]))) {
                prod *= trace_powers[(size_t)len];
            }
            f += c * prod;
        }
    }
    return f;
}

/// Unbiased estimate of ||E[O^{(x)k} (x) conj(O)^{(x)k}] - M_ref||_F^2 from n samples, using all
/// sample pairs, with leave-one-out jackknife errors.
inline PairStatistic pair_statistic_distance(const Sampler &sampler, const PermutationPairMoment &ref, uint64_t n,
                                             StreamSeed seed, size_t block = 512) {
    if (n < 3) {
        throw DomainError("pair_statistic_distance: need at least 3 samples");
    }
    int k = ref.k;
    auto N = (Eigen::Index)ref.N;
    auto L = N * N;
    DenseOperator X(L, (Eigen::Index)n);
    std::vector<double> f(n);
    parallel_for(n, [&](size_t s) {
        Rng rng = seed.at(s);
        DenseOperator O = sampler(rng);
        if (O.rows() != N || O.cols() != N) {
            throw DomainError("sampler returned wrong dimension");
        }
        X.col((Eigen::Index)s) = Eigen::Map<const Eigen::VectorXcd>(O.data(), L);
        DenseOperator H = O.adjoint() * O;
        std::vector<double> tp((size_t)k + 1, 0.0);
        DenseOperator P = H;
        for (int p = 1; p <= k; p++) {
            tp[(size_t)p] = P.trace().real();
            if (p < k) P = (P * H).eval();
        }
        f[s] = reference_feature(ref, tp);
    });

    size_t nb = (n + block - 1) / block;
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t a = 0; a < nb; a++) {
        for (size_t b = a; b < nb; b++) pairs.emplace_back(a, b);
    }
    // Per block pair: row sums for block a rows and column sums for block b columns.
    std::vector<std::vector<double>> rows(pairs.size()), cols(pairs.size());
    parallel_for(pairs.size(), [&](size_t q) {
        auto [a, b] = pairs[q];
        size_t a0 = a * block, a1 = std::min(n, a0 + block);
        size_t b0 = b * block, b1 = std::min(n, b0 + block);
        DenseOperator g = X.middleCols((Eigen::Index)a0, (Eigen::Index)(a1 - a0)).adjoint() *
                          X.middleCols((Eigen::Index)b0, (Eigen::Index)(b1 - b0));
        std::vector<double> rs(a1 - a0, 0.0), cs(b1 - b0, 0.0);
        for (size_t j = b0; j < b1; j++) {
            for (size_t i = a0; i < a1; i++) {
                if (a == b && i >= j) continue;
                double h = std::pow(std::norm(g((Eigen::Index)(i - a0), (Eigen::Index)(j - b0))), k);
                rs[i - a0] += h;
                cs[j - b0] += h;
            }
        }
        rows[q] = std::move(rs);
        cols[q] = std::move(cs);
    });
    std::vector<double> R(n, 0.0);
    for (size_t q = 0; q < pairs.size(); q++) {
        auto [a, b] = pairs[q];
        for (size_t i = 0; i < rows[q].size(); i++) R[a * block + i] += rows[q][i];
        for (size_t j = 0; j < cols[q].size(); j++) R[b * block + j] += cols[q][j];
    }
    KahanSum<double> Tk, Fk;
    for (size_t s = 0; s < n; s++) {
        Tk.add(R[s]);
        Fk.add(f[s]);
    }
    double T = Tk.value();  // ordered pairs: each unordered pair counted twice
    double F = Fk.value();
    double dn = (double)n;
    double refn = ref.frobenius_norm_sq();

    PairStatistic ps;
    ps.reference_norm_sq = refn;
    double U = T / (dn * (dn - 1));
    double cross = F / dn;
    double d2 = U - 2 * cross + refn;

    std::vector<double> jd(n), ju(n), jc(n);
    for (size_t s = 0; s < n; s++) {
        ju[s] = (T - 2 * R[s]) / ((dn - 1) * (dn - 2));
        jc[s] = (F - f[s]) / (dn - 1);
        jd[s] = ju[s] - 2 * jc[s] + refn;
    }
    auto jack = [&](const std::vector<double> &v) {
        double m = 0;
        for (double x : v) m += x;
        m /= dn;
        double q = 0;
        for (double x : v) q += (x - m) * (x - m);
        return std::sqrt(q * (dn - 1) / dn);
    };
    ps.self_overlap = {U, jack(ju), n};
    ps.cross = {cross, jack(jc), n};
    ps.d2 = {d2, jack(jd), n};
    ps.distance = std::sqrt(std::max(0.0, d2));
    ps.distance_se = ps.distance > 0 ? ps.d2.std_error / (2 * ps.distance) : std::sqrt(ps.d2.std_error);
    return ps;
}

// ---- Experiments ----------------------------------------------------------------

/// Samplers keyed by name: "haar", "ginibre", "perm", "phased", "V".
inline Sampler make_sampler(const std::string &name, const EnsembleConfig &cfg) {
    auto N = (size_t)cfg.N;
    if (name == "haar") return [N](Rng &r) { return sample_haar(N, r); };
    if (name == "ginibre") return [N](Rng &r) { return sample_ginibre(N, r); };
    if (name == "perm") return [N](Rng &r) { return sample_uniform_permutation(N, r).dense(); };
    if (name == "phased") return [N](Rng &r) { return sample_phased_permutation(N, r).dense(); };
    if (name == "V") {
        EnsembleConfig c = cfg;
        c.theta = cfg.resolved_theta();
        return [c](Rng &r) { return build_V(c, r); };
    }
    throw DomainError("unknown ensemble: " + name);
}

/// O = sum_j w_j Z_j with independent phased permutations.
inline Sampler lindeberg_sampler(const std::vector<double> &weights, size_t N) {
    return [weights, N](Rng &rng) {
        DenseOperator O = DenseOperator::Zero((Eigen::Index)N, (Eigen::Index)N);
        for (double w : weights) {
            PhasedPermutation z = sample_phased_permutation(N, rng);
            for (size_t i = 0; i < N; i++) {
                uint32_t j = z.perm()[i];
                O(j, (Eigen::Index)i) += w * z.phases()[j];
            }
        }
        return O;
    };
}

/// (1/8) sum_j ((4k|w_j|)^4 + (4k|w_j|)^{2k}).
inline double lindeberg_bound(const std::vector<double> &weights, int k) {
    double s = 0;
    for (double w : weights) {
        double a = 4.0 * k * std::abs(w);
        s += std::pow(a, 4) + std::pow(a, 2 * k);
    }
    return s / 8.0;
}

inline ExperimentRecord lindeberg_experiment(const std::vector<double> &weights, int k, int N, uint64_t n_samples,
                                             StreamSeed seed) {
    if (weights.empty()) {
        throw DomainError("lindeberg_experiment: no weights");
    }
    double s2 = 0;
    for (double w : weights) s2 += w * w;
    if (std::abs(s2 - 1.0) > 1e-12) {
        throw DomainError("lindeberg_experiment: weights must satisfy sum w^2 = 1");
    }
    auto t0 = std::chrono::steady_clock::now();
    PairStatistic ps =
        pair_statistic_distance(lindeberg_sampler(weights, (size_t)N), ginibre_moment_structured(k, N), n_samples, seed);
    ExperimentRecord rec;
    rec.config = {{"k", k}, {"N", N}, {"terms", weights.size()}, {"weights", weights}};
    rec.metric = "frobenius_distance_to_ginibre";
    rec.value = ps.distance;
    rec.std_error = ps.distance_se;
    rec.n_samples = n_samples;
    rec.extra = {{"d2", ps.d2.value},
                 {"d2_se", ps.d2.std_error},
                 {"self_overlap", ps.self_overlap.value},
                 {"cross", ps.cross.value},
                 {"reference_norm_sq", ps.reference_norm_sq},
                 {"bound", lindeberg_bound(weights, k)},
                 {"norm_proxy", "frobenius (diamond norm not computed)"}};
    rec.wall_time = detail::seconds_since(t0);
    return rec;
}

inline ExperimentRecord design_cell(const EnsembleConfig &cfg, uint64_t n_samples, StreamSeed seed) {
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    EnsembleConfig c = cfg;
    c.theta = cfg.resolved_theta();
    Sampler s = [c](Rng &r) { return build_V(c, r); };
    PairStatistic ps = pair_statistic_distance(s, haar_moment_structured(cfg.k, cfg.N), n_samples, seed);
    ExperimentRecord rec;
    rec.config = {{"N", cfg.N}, {"m", cfg.m}, {"ell", cfg.ell}, {"k", cfg.k}, {"theta", *c.theta}};
    rec.metric = "frobenius_distance_sq_to_haar";
    rec.value = ps.d2.value;
    rec.std_error = ps.d2.std_error;
    rec.n_samples = n_samples;
    rec.extra = {{"distance", ps.distance},
                 {"distance_se", ps.distance_se},
                 {"frame_potential_ustat", ps.self_overlap.value},
                 {"frame_potential_ustat_se", ps.self_overlap.std_error},
                 {"norm_proxy", "frobenius (diamond norm not computed)"}};
    rec.wall_time = detail::seconds_since(t0);
    return rec;
}

/// One record per (N, m, ell) cell; seeds split per cell index.
inline std::vector<ExperimentRecord> design_report(const std::vector<EnsembleConfig> &cells, uint64_t n_samples,
                                                   StreamSeed seed) {
    std::vector<ExperimentRecord> out;
    for (size_t i = 0; i < cells.size(); i++) out.push_back(design_cell(cells[i], n_samples, seed.child(i)));
    return out;
}

/// Sequence check. nonincreasing: next <= prev + z sigma; strict: prev - next > z sigma.
struct MonotoneSummary {
    bool holds = true;
    std::vector<double> margins;
};

inline MonotoneSummary monotone_check(const std::vector<double> &v, const std::vector<double> &se, bool strict,
                                      double z = 2.0) {
    MonotoneSummary m;
    for (size_t i = 1; i < v.size(); i++) {
        double sig = std::sqrt(se[i - 1] * se[i - 1] + se[i] * se[i]);
        double margin = strict ? (v[i - 1] - v[i]) - z * sig : (v[i - 1] + z * sig) - v[i];
        m.margins.push_back(margin);
        if (margin <= 0 && strict) m.holds = false;
        if (margin < 0 && !strict) m.holds = false;
    }
    return m;
}

// ---- Freeness ---------------------------------------------------------------------

namespace detail {

inline void check_words(const std::vector<FreeWord> &words) {
    if (words.empty()) {
        throw DomainError("freeness: no words");
    }
    for (size_t i = 0; i < words.size(); i++) {
        if (words[i].empty()) {
            throw DomainError("freeness: trivial word");
        }
        for (size_t j = 0; j < i; j++) {
            if (words[i] == words[j]) throw DomainError("freeness: duplicate word");
        }
    }
}

inline int word_generators(const std::vector<FreeWord> &words) {
    int g = 0;
    for (const auto &w : words) g = std::max(g, w.max_generator());
    return g;
}

/// Image of basis index 0 under each word (rightmost letter acts first).
inline std::vector<uint32_t> word_images(const std::vector<FreeWord> &words, const std::vector<Permutation> &perms,
                                         std::vector<Permutation> &inverses) {
    std::vector<uint32_t> out;
    for (const auto &w : words) {
        uint32_t idx = 0;
        const auto &c = w.codes();
        for (size_t t = c.size(); t-- > 0;) {
            size_t g = (size_t)std::abs(c[t]) - 1;
            if (c[t] > 0) {
                idx = perms[g][idx];
            } else {
                if (inverses[g].size() == 0) inverses[g] = perms[g].inverse();
                idx = inverses[g][idx];
            }
        }
        out.push_back(idx);
    }
    return out;
}

/// Uniform random permutation of [0, N) revealed one value at a time.
class LazyPermutation {
public:
    explicit LazyPermutation(uint32_t N) : N_(N) {}
    uint32_t forward(uint32_t x, Rng &rng) {
        auto it = fwd_.find(x);
        if (it != fwd_.end()) return it->second;
        uint32_t y;
        do {
            y = (uint32_t)uniform_below(rng, N_);
        } while (bwd_.count(y));
        fwd_[x] = y;
        bwd_[y] = x;
        return y;
    }
    uint32_t backward(uint32_t y, Rng &rng) {
        auto it = bwd_.find(y);
        if (it != bwd_.end()) return it->second;
        uint32_t x;
        do {
            x = (uint32_t)uniform_below(rng, N_);
        } while (fwd_.count(x));
        fwd_[x] = y;
        bwd_[y] = x;
        return x;
    }

private:
    uint32_t N_;
    std::unordered_map<uint32_t, uint32_t> fwd_, bwd_;
};

inline std::vector<uint32_t> word_images_lazy(const std::vector<FreeWord> &words, std::vector<LazyPermutation> &perms,
                                              Rng &rng) {
    std::vector<uint32_t> out;
    for (const auto &w : words) {
        uint32_t idx = 0;
        const auto &c = w.codes();
        for (size_t t = c.size(); t-- > 0;) {
            auto &p = perms[(size_t)std::abs(c[t]) - 1];
            idx = c[t] > 0 ? p.forward(idx, rng) : p.backward(idx, rng);
        }
        out.push_back(idx);
    }
    return out;
}

/// Equality pattern of (0, images...).
inline std::vector<uint8_t> pattern_of(const std::vector<uint32_t> &images) {
    std::vector<uint32_t> pts{0};
    pts.insert(pts.end(), images.begin(), images.end());
    return kernel_partition(pts).rgs();
}

/// Probability of a pattern when the images are i.i.d. uniform and the base point is 0.
inline double reference_pattern_prob(const SetPartition &p, int N) {
    double pr = 1.0;
    for (int j = 1; j < p.num_blocks(); j++) pr *= (double)(N - j) / N;
    for (size_t i = 0; i < p.size() - (size_t)p.num_blocks(); i++) pr /= N;
    return pr;
}

inline double tv_from_counts(const std::map<std::vector<uint8_t>, uint64_t> &counts, uint64_t total, int w, int N) {
    double tv = 0;
    for (const auto &p : enumerate_partitions(w + 1)) {
        auto it = counts.find(p.rgs());
        double ph = it == counts.end() ? 0.0 : (double)it->second / (double)total;
        tv += std::abs(ph - reference_pattern_prob(p, N));
    }
    return 0.5 * tv;
}

}  // namespace detail

/// Total variation between the joint law of the word images of a fixed basis state and
/// the law of independent uniform images. Both laws are invariant under relabelings fixing
/// the base point, so the distance equals that between equality-pattern laws.
inline std::vector<ExperimentRecord> freeness_experiment(const std::vector<FreeWord> &words,
                                                         const std::vector<int> &N_list, uint64_t n_samples,
                                                         StreamSeed seed) {
    detail::check_words(words);
    if (words.size() > 8) {
        throw ResourceError("freeness: at most 8 words");
    }
    if (n_samples < 10) {
        throw DomainError("freeness: n_samples must be >= 10");
    }
    int g = detail::word_generators(words);
    int w = (int)words.size();
    std::vector<ExperimentRecord> out;
    for (size_t ni = 0; ni < N_list.size(); ni++) {
        int N = N_list[ni];
        if (N < 1) throw DomainError("freeness: N must be >= 1");
        auto t0 = std::chrono::steady_clock::now();
        StreamSeed ss = seed.child(ni);
        const int B = 10;
        std::vector<std::map<std::vector<uint8_t>, uint64_t>> hist(B);
        parallel_for(B, [&](size_t b) {
            uint64_t lo = n_samples * b / B, hi = n_samples * (b + 1) / B;
            for (uint64_t s = lo; s < hi; s++) {
                Rng rng = ss.at(s);
                // Phases do not affect which basis state is reached; only the visited
                // entries of each permutation are drawn.
                std::vector<detail::LazyPermutation> perms((size_t)g, detail::LazyPermutation((uint32_t)N));
                hist[b][detail::pattern_of(detail::word_images_lazy(words, perms, rng))]++;
            }
        });
        std::map<std::vector<uint8_t>, uint64_t> total;
        std::vector<double> batch_tv;
        for (int b = 0; b < B; b++) {
            uint64_t nb = 0;
            for (const auto &[p, c] : hist[(size_t)b]) {
                total[p] += c;
                nb += c;
            }
            batch_tv.push_back(detail::tv_from_counts(hist[(size_t)b], nb, w, N));
        }
        ExperimentRecord rec;
        std::vector<std::string> ws;
        for (const auto &x : words) ws.push_back(x.str());
        rec.config = {{"N", N}, {"words", ws}};
        rec.metric = "tv_distance_to_independent";
        rec.value = detail::tv_from_counts(total, n_samples, w, N);
        // Batch spread scaled to the full sample; conservative since batch TV carries more bias.
        rec.std_error = detail::mean_and_se(batch_tv).std_error;
        rec.n_samples = n_samples;
        rec.extra = {{"patterns_seen", total.size()}};
        rec.wall_time = detail::seconds_since(t0);
        out.push_back(rec);
    }
    return out;
}

/// Exact TV by enumerating all generator tuples (N <= 6).
inline double freeness_tv_exact(const std::vector<FreeWord> &words, int N) {
    detail::check_words(words);
    if (N > 6) {
        throw ResourceError("freeness_tv_exact: N capped at 6");
    }
    int g = detail::word_generators(words);
    auto all = all_permutations((size_t)N);
    uint64_t total = ipow(all.size(), (unsigned)g);
    if (total > 5000000) {
        throw ResourceError("freeness_tv_exact: too many generator tuples");
    }
    std::map<std::vector<uint8_t>, uint64_t> counts;
    std::vector<size_t> idx((size_t)g, 0);
    for (uint64_t t = 0; t < total; t++) {
        uint64_t x = t;
        std::vector<Permutation> perms;
        for (int a = 0; a < g; a++) {
            perms.push_back(all[x % all.size()]);
            x /= all.size();
        }
        std::vector<Permutation> inv((size_t)g);
        counts[detail::pattern_of(detail::word_images(words, perms, inv))]++;
    }
    // Exact rational comparison: counts * N^{w} against reference numerators.
    int w = (int)words.size();
    Rational tv = 0;
    for (const auto &p : enumerate_partitions(w + 1)) {
        auto it = counts.find(p.rgs());
        Rational ph = it == counts.end() ? Rational(0) : Rational(BigInt(it->second), BigInt(total));
        BigInt num = 1;
        for (int j = 1; j < p.num_blocks(); j++) num *= (N - j);
        Rational q(num, boost::multiprecision::pow(BigInt(N), (unsigned)w));
        Rational d = ph - q;
        tv += d < 0 ? Rational(-d) : d;
    }
    return static_cast<double>(tv / 2);
}

}  // namespace haarforge

#endif
