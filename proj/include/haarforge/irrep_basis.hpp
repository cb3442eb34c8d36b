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

#ifndef HAARFORGE_IRREP_BASIS_HPP
#define HAARFORGE_IRREP_BASIS_HPP

#include <unordered_map>

#include "haarforge/partition_algebra.hpp"
#include "haarforge/symmetric_group.hpp"

namespace haarforge {

/// Diagram whose bottom nodes 1..m propagate through distinct blocks and whose bottom
/// nodes m+1..k are singletons.
struct MFactorDiagram {
    SetPartitionDiagram base;
    int m = 0;
    bool noncrossing = false;
};

namespace detail {

/// Top-row restriction plus the m propagating bottom nodes, as a partition of k+m points.
inline SetPartition factor_core(const SetPartitionDiagram &d, int m) {
    int k = d.k();
    std::vector<int> lab((size_t)(k + m));
    for (int i = 0; i < k + m; i++) lab[(size_t)i] = d.partition().block_of((size_t)i);
    return SetPartition(lab);
}

/// Propagating blocks sorted by rightmost top node meet bottom nodes 1..m in order.
inline bool wiring_is_noncrossing(const SetPartition &core, int k, int m) {
    int prev = -1;
    for (int j = 0; j < m; j++) {
        int b = core.block_of((size_t)(k + j));
        int mx = -1;
        for (int i = 0; i < k; i++) {
            if (core.block_of((size_t)i) == b) mx = i;
        }
        if (mx <= prev) return false;
        prev = mx;
    }
    return true;
}

}  // namespace detail

inline std::vector<MFactorDiagram> enumerate_m_factors(int k, int m, bool noncrossing) {
    if (m < 0 || k < 1 || m > k || k > 4) {
        throw DomainError("enumerate_m_factors: need 0 <= m <= k <= 4");
    }
    std::vector<MFactorDiagram> out;
    for (const auto &g : enumerate_partitions(k + m)) {
        bool ok = true;
        for (int j = 0; j < m && ok; j++) {
            int b = g.block_of((size_t)(k + j));
            for (int j2 = 0; j2 < j; j2++) {
                if (g.block_of((size_t)(k + j2)) == b) ok = false;
            }
            bool touches_top = false;
            for (int i = 0; i < k; i++) touches_top |= g.block_of((size_t)i) == b;
            ok = ok && touches_top;
        }
        if (!ok) continue;
        bool nc = detail::wiring_is_noncrossing(g, k, m);
        if (noncrossing && !nc) continue;
        std::vector<int> lab((size_t)(2 * k));
        for (int i = 0; i < k + m; i++) lab[(size_t)i] = g.block_of((size_t)i);
        for (int j = m; j < k; j++) lab[(size_t)(k + j)] = 1000 + j;
        out.push_back({SetPartitionDiagram(k, SetPartition(lab)), m, nc});
    }
    return out;
}

/// True iff the diagram satisfies the m-factor constraints.
inline bool is_m_factor(const SetPartitionDiagram &d, int m) {
    int k = d.k();
    const auto &p = d.partition();
    for (int j = 0; j < k; j++) {
        int b = p.block_of((size_t)(k + j));
        int count_bottom = 0;
        bool top = false;
        for (int i = 0; i < 2 * k; i++) {
            if (p.block_of((size_t)i) != b) continue;
            if (i < k) top = true; else count_bottom++;
        }
        if (j < m && (!top || count_bottom != 1)) return false;
        if (j >= m && (top || count_bottom != 1)) return false;
    }
    return true;
}

/// N^{k-m} (N-m)(N-m-1)...(N-m-d+1), d = closed components of omega^dagger omega.
inline double factor_norm_constant(const MFactorDiagram &w, int N) {
    int k = w.base.k();
    int d = multiply(involution(w.base), w.base).d;
    double c = std::pow((double)N, k - w.m);
    for (int i = 0; i < d; i++) c *= (double)(N - w.m - i);
    return c;
}

/// Hat-O_omega: distinct labels on the top row and the m propagating bottom nodes,
/// free labels on the isolated bottom nodes.
inline DenseOperator hat_operator(const MFactorDiagram &w, int N) {
    int k = w.base.k();
    detail::check_dense_cap(k, N);
    SetPartition core = detail::factor_core(w.base, w.m);
    auto D = (Eigen::Index)ipow((uint64_t)N, (unsigned)k);
    DenseOperator out = DenseOperator::Zero(D, D);
    std::vector<int> lab((size_t)(2 * k));
    std::vector<int> scratch((size_t)core.num_blocks());
    for (Eigen::Index r = 0; r < D; r++) {
        detail::decode_digits((uint64_t)r, N, k, lab, 0);
        for (Eigen::Index c = 0; c < D; c++) {
            detail::decode_digits((uint64_t)c, N, k, lab, k);
            std::vector<int> head(lab.begin(), lab.begin() + k + w.m);
            if (detail::label_match(core, head, scratch) == 2) out(r, c) = 1.0;
        }
    }
    return out;
}

/// e_m = I^{(x)m} (x) (J/N)^{(x)(k-m)}.
inline DenseOperator e_m_operator(int k, int m, int N) {
    DenseOperator out = DenseOperator::Identity(1, 1);
    for (int i = 0; i < k; i++) {
        DenseOperator f = i < m ? DenseOperator(DenseOperator::Identity(N, N)) : DenseOperator(DenseOperator::Constant(N, N, 1.0 / N));
        DenseOperator t(out.rows() * N, out.cols() * N);
        for (Eigen::Index a = 0; a < out.rows(); a++) {
            for (Eigen::Index b = 0; b < out.cols(); b++) t.block(a * N, b * N, N, N) = out(a, b) * f;
        }
        out = std::move(t);
    }
    return out;
}

/// Dense P_sigma on (C^N)^{(x)m}: P_sigma |x_1..x_m> = |x_{sigma^-1(1)}..>.
inline DenseOperator permutation_operator(const SmallPerm &sigma, int N) {
    int m = (int)sigma.size();
    auto D = (Eigen::Index)ipow((uint64_t)N, (unsigned)m);
    DenseOperator P = DenseOperator::Zero(D, D);
    std::vector<int> x((size_t)m), y((size_t)m);
    for (Eigen::Index c = 0; c < D; c++) {
        detail::decode_digits((uint64_t)c, N, m, x, 0);
        for (int a = 0; a < m; a++) y[(size_t)sigma[(size_t)a]] = x[(size_t)a];
        uint64_t r = 0;
        for (int a = 0; a < m; a++) r = r * (uint64_t)N + (uint64_t)y[(size_t)a];
        P((Eigen::Index)r, c) = 1.0;
    }
    return P;
}

inline DenseOperator group_algebra_operator(const GroupAlgebraElement &g, int N, double scale = 1.0) {
    auto D = (Eigen::Index)ipow((uint64_t)N, (unsigned)g.degree());
    DenseOperator out = DenseOperator::Zero(D, D);
    for (const auto &[s, c] : g.terms()) out += (scale * static_cast<double>(c)) * permutation_operator(s, N);
    return out;
}

inline DenseOperator kron_identity(const DenseOperator &a, int n_id) {
    DenseOperator out = DenseOperator::Zero(a.rows() * n_id, a.cols() * n_id);
    for (Eigen::Index r = 0; r < a.rows(); r++) {
        for (Eigen::Index c = 0; c < a.cols(); c++) {
            if (a(r, c) == Complex(0)) continue;
            for (int t = 0; t < n_id; t++) out(r * n_id + t, c * n_id + t) = a(r, c);
        }
    }
    return out;
}

/// HS-orthogonal projection onto the complement of span{O_Pi : Pi has < m propagating blocks}.
class QuotientProjector {
   public:
    QuotientProjector(int k, int m, int N) : k_(k), N_(N) {
        detail::check_dense_cap(k, N);
        for (auto &d : enumerate_diagrams(k)) {
            if (propagating_count(d) <= m - 1) span_.push_back(d);
        }
        auto D2 = ipow((uint64_t)N, (unsigned)(2 * k));
        std::vector<int> lab((size_t)(2 * k));
        kernel_.resize(D2);
        for (uint64_t x = 0; x < D2; x++) {
            detail::decode_digits(x, N, 2 * k, lab, 0);
            SetPartition p = kernel_partition(lab);
            auto it = ids_.find(p);
            if (it == ids_.end()) {
                it = ids_.emplace(p, (int)kernels_.size()).first;
                kernels_.push_back(p);
            }
            kernel_[x] = it->second;
        }
        auto S = (Eigen::Index)span_.size();
        G_.resize(S, S);
        for (Eigen::Index i = 0; i < S; i++) {
            for (Eigen::Index j = 0; j < S; j++) {
                G_(i, j) = std::pow((double)N, inner_product_power(span_[(size_t)i], span_[(size_t)j]));
            }
        }
        below_.assign(kernels_.size(), {});
        for (size_t q = 0; q < kernels_.size(); q++) {
            for (size_t i = 0; i < span_.size(); i++) {
                if (refines(span_[i].partition(), kernels_[q])) below_[q].push_back((int)i);
            }
        }
        if (S > 0) solver_.compute(G_);
    }

    size_t span_size() const {
        return span_.size();
    }

    DenseOperator operator()(const DenseOperator &X) const {
        if (span_.empty()) return X;
        auto D = X.rows();
        std::vector<Complex> by_kernel(kernels_.size(), 0.0);
        for (Eigen::Index r = 0; r < D; r++) {
            for (Eigen::Index c = 0; c < D; c++) by_kernel[(size_t)kernel_[(uint64_t)(r * D + c)]] += X(r, c);
        }
        Eigen::VectorXcd b = Eigen::VectorXcd::Zero((Eigen::Index)span_.size());
        for (size_t q = 0; q < kernels_.size(); q++) {
            for (int i : below_[q]) b[i] += by_kernel[q];
        }
        Eigen::VectorXcd a = solver_.solve(b.real()).cast<Complex>() +
                             Complex(0, 1) * solver_.solve(b.imag()).cast<Complex>();
        std::vector<Complex> fill(kernels_.size(), 0.0);
        for (size_t q = 0; q < kernels_.size(); q++) {
            for (int i : below_[q]) fill[q] += a[i];
        }
        DenseOperator out = X;
        for (Eigen::Index r = 0; r < D; r++) {
            for (Eigen::Index c = 0; c < D; c++) out(r, c) -= fill[(size_t)kernel_[(uint64_t)(r * D + c)]];
        }
        return out;
    }

   private:
    int k_, N_;
    std::vector<SetPartitionDiagram> span_;
    std::vector<SetPartition> kernels_;
    std::unordered_map<SetPartition, int, SetPartitionHash> ids_;
    std::vector<int> kernel_;
    std::vector<std::vector<int>> below_;
    Eigen::MatrixXd G_;
    Eigen::FullPivLU<Eigen::MatrixXd> solver_;
};

struct IrrepBasisVector {
    MFactorDiagram omega;
    Tableau tableau;
    double c = 1;
    DenseOperator raw;        // Hat-O_omega u_t p / sqrt(c)
    DenseOperator projected;  // after the quotient projection
};

struct IrrepBasis {
    int k = 1, m = 0, N = 1;
    IntegerPartition lambda_star;
    double dim_irrep = 1;  // dim S_lambda of the padded shape
    std::vector<IrrepBasisVector> vectors;
    Eigen::MatrixXcd gram;  // <v_i, v_j> = tr(Q v_i^dagger Q v_j) / dim S_lambda

    std::vector<DenseOperator> operators() const {
        std::vector<DenseOperator> out;
        for (const auto &v : vectors) out.push_back(v.raw);
        return out;
    }
};

/// Representatives (1/sqrt c(omega)) Hat-O_omega u_t p_{lambda*} over noncrossing omega and
/// standard tableaux t of shape lambda*.
inline IrrepBasis irrep_basis_small_k(int k, const IntegerPartition &lambda_star, int N) {
    int m = lambda_star.size();
    if (k < 1 || k > 3) {
        throw ResourceError("irrep_basis_small_k: k capped at 3");
    }
    if (N > 8) {
        throw ResourceError("irrep_basis_small_k: N capped at 8");
    }
    if (N < 2 * k) {
        throw DomainError("irrep_basis_small_k: requires N >= 2k");
    }
    if (m > k) {
        throw DomainError("irrep_basis_small_k: |lambda*| must not exceed k");
    }
    IrrepBasis ib;
    ib.k = k;
    ib.m = m;
    ib.N = N;
    ib.lambda_star = lambda_star;
    ib.dim_irrep = static_cast<double>(hook_dim(lambda_star, N));

    TableauFrame frame = orthogonal_tableau_frame(lambda_star);
    int rest = (int)ipow((uint64_t)N, (unsigned)(k - m));
    QuotientProjector Q(k, m, N);
    for (const auto &w : enumerate_m_factors(k, m, true)) {
        DenseOperator hat = hat_operator(w, N);
        double c = factor_norm_constant(w, N);
        for (size_t t = 0; t < frame.tableaux.size(); t++) {
            GroupAlgebraElement y = frame.u[t] * frame.p;
            DenseOperator Py = kron_identity(group_algebra_operator(y, N, frame.scale[t]), rest);
            IrrepBasisVector v;
            v.omega = w;
            v.tableau = frame.tableaux[t];
            v.c = c;
            v.raw = hat * Py / std::sqrt(c);
            v.projected = Q(v.raw);
            ib.vectors.push_back(std::move(v));
        }
    }
    auto n = (Eigen::Index)ib.vectors.size();
    ib.gram.resize(n, n);
    for (Eigen::Index i = 0; i < n; i++) {
        for (Eigen::Index j = 0; j < n; j++) {
            ib.gram(i, j) = (ib.vectors[(size_t)i].projected.adjoint() * ib.vectors[(size_t)j].projected).trace() /
                            ib.dim_irrep;
        }
    }
    return ib;
}

/// max over omega, omega' in NF_m of ||Q(Hat-O_omega'^dagger Hat-O_omega - delta c(omega) e_m)||_F.
inline double multiplicative_residual(int k, int m, int N) {
    QuotientProjector Q(k, m, N);
    auto fs = enumerate_m_factors(k, m, true);
    DenseOperator em = e_m_operator(k, m, N);
    std::vector<DenseOperator> hats;
    for (const auto &w : fs) hats.push_back(hat_operator(w, N));
    double worst = 0;
    for (size_t a = 0; a < fs.size(); a++) {
        for (size_t b = 0; b < fs.size(); b++) {
            DenseOperator x = hats[b].adjoint() * hats[a];
            if (a == b) x -= factor_norm_constant(fs[a], N) * em;
            worst = std::max(worst, Q(x).norm());
        }
    }
    return worst;
}

}  // namespace haarforge

#endif
