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

#ifndef HAARFORGE_MATRIX_ENGINE_HPP
#define HAARFORGE_MATRIX_ENGINE_HPP

#include <cmath>
#include <optional>
#include <sstream>

#include "haarforge/perm_core.hpp"
#include "haarforge/theta_select.hpp"

namespace haarforge {

struct EnsembleConfig {
    int N = 16;
    int m = 2;
    int ell = 4;
    int k = 2;
    std::optional<double> theta;
    uint64_t seed = 0;
    // 0 means exact exponentials; otherwise the Taylor degree used for each factor.
    int taylor_degree = 0;

    /// ell = 0 is accepted and gives the bare product Z_L Z_R.
    void validate() const {
        std::ostringstream bad;
        if (N < 1) bad << " N>=1";
        if (m < 1) bad << " m>=1";
        if (ell < 0) bad << " ell>=0";
        if (k < 1) bad << " k>=1";
        if (taylor_degree < 0) bad << " taylor_degree>=0";
        if (theta && !std::isfinite(*theta)) bad << " theta finite";
        if (!bad.str().empty()) {
            throw DomainError("invalid ensemble config, violated:" + bad.str());
        }
    }

    void require_stable_range() const {
        if (N < 2 * k) {
            throw DomainError(
                "N=" + std::to_string(N) + " is outside the stable range N >= 2k=" + std::to_string(2 * k));
        }
    }

    double resolved_theta() const {
        return theta ? *theta : find_theta(m);
    }
};

inline DenseOperator build_A_m(const std::vector<PhasedPermutation> &zs) {
    if (zs.empty()) {
        throw DomainError("build_A_m: need at least one phased permutation");
    }
    size_t N = zs[0].dim();
    DenseOperator a = DenseOperator::Zero((Eigen::Index)N, (Eigen::Index)N);
    for (const auto &z : zs) {
        if (z.dim() != N) {
            throw DomainError("build_A_m: dimension mismatch");
        }
        for (size_t i = 0; i < N; i++) {
            uint32_t j = z.perm()[i];
            Complex p = z.phases()[j];
            a(j, (Eigen::Index)i) += p;
            a((Eigen::Index)i, j) += std::conj(p);
        }
    }
    a *= 1.0 / std::sqrt(2.0 * (double)zs.size());
    return a;
}

inline DenseOperator expm_hermitian(const DenseOperator &H, double theta) {
    if (H.rows() != H.cols()) {
        throw DomainError("expm_hermitian: matrix must be square");
    }
    double herm = hermiticity_defect(H);
    if (herm > 1e-10) {
        std::ostringstream msg;
        msg << "expm_hermitian: input not Hermitian (defect " << herm << ")";
        throw DomainError(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(H);
    if (es.info() != Eigen::Success) {
        throw NumericError("expm_hermitian: eigendecomposition failed");
    }
    const auto &V = es.eigenvectors();
    Eigen::VectorXcd ph(V.cols());
    for (Eigen::Index j = 0; j < V.cols(); j++) {
        ph[j] = std::polar(1.0, theta * es.eigenvalues()[j]);
    }
    DenseOperator U = V * ph.asDiagonal() * V.adjoint();
    double defect = unitarity_defect(U);
    if (defect > 1e-10) {
        std::ostringstream msg;
        msg << "expm_hermitian: result not unitary (defect " << defect << ")";
        throw NumericError(msg.str());
    }
    return U;
}

/// h_d(theta H) = sum_{p <= d} (i theta H)^p / p!.
inline DenseOperator truncated_taylor(const DenseOperator &H, double theta, int d) {
    if (d < 0) {
        throw DomainError("truncated_taylor: d must be >= 0");
    }
    auto n = H.rows();
    DenseOperator sum = DenseOperator::Identity(n, n);
    DenseOperator term = DenseOperator::Identity(n, n);
    DenseOperator step = Complex(0, theta) * H;
    for (int p = 1; p <= d; p++) {
        term = (term * step).eval();
        term /= (double)p;
        sum += term;
    }
    return sum;
}

/// ceil(sqrt(m) ln(k ell / eps)) + 4 with eps = 1e-8.
inline int default_taylor_degree(int m, int k, int ell, double eps = 1e-8) {
    double kl = std::max(1.0, (double)k * std::max(1, ell));
    return (int)std::ceil(std::sqrt((double)m) * std::log(kl / eps)) + 4;
}

/// Draw order: Z_L, then m generators per factor, then Z_R.
inline DenseOperator build_V(const EnsembleConfig &cfg, Rng &rng) {
    cfg.validate();
    double theta = cfg.resolved_theta();
    auto N = (size_t)cfg.N;
    PhasedPermutation zl = sample_phased_permutation(N, rng);
    DenseOperator V = zl.dense();
    std::vector<PhasedPermutation> zs((size_t)cfg.m);
    for (int j = 0; j < cfg.ell; j++) {
        for (auto &z : zs) {
            z = sample_phased_permutation(N, rng);
        }
        DenseOperator A = build_A_m(zs);
        DenseOperator E = cfg.taylor_degree > 0 ? truncated_taylor(A, theta, cfg.taylor_degree) : expm_hermitian(A, theta);
        V = (V * E).eval();
    }
    PhasedPermutation zr = sample_phased_permutation(N, rng);
    // Right multiplication by a phased permutation only moves and rescales columns.
    DenseOperator out(V.rows(), V.cols());
    for (size_t i = 0; i < N; i++) {
        uint32_t j = zr.perm()[i];
        out.col((Eigen::Index)i) = V.col(j) * zr.phases()[j];
    }
    if (cfg.taylor_degree == 0) {
        double defect = unitarity_defect(out);
        if (defect > 1e-9) {
            std::ostringstream msg;
            msg << "build_V: unitarity defect " << defect;
            throw NumericError(msg.str());
        }
    }
    return out;
}

inline DenseOperator sample_ginibre(size_t N, Rng &rng) {
    if (N == 0) {
        throw DomainError("sample_ginibre: N must be >= 1");
    }
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(2.0 * (double)N));
    DenseOperator G((Eigen::Index)N, (Eigen::Index)N);
    for (Eigen::Index c = 0; c < G.cols(); c++) {
        for (Eigen::Index r = 0; r < G.rows(); r++) {
            double re = g(rng);
            double im = g(rng);
            G(r, c) = {re, im};
        }
    }
    return G;
}

/// QR of a Ginibre matrix with the phases of diag(R) moved into Q.
inline DenseOperator sample_haar(size_t N, Rng &rng) {
    DenseOperator G = sample_ginibre(N, rng);
    Eigen::HouseholderQR<DenseOperator> qr(G);
    DenseOperator Q = qr.householderQ();
    DenseOperator R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < Q.cols(); j++) {
        Complex d = R(j, j);
        double a = std::abs(d);
        Complex ph = a > 0 ? d / a : Complex(1.0);
        Q.col(j) *= ph;
    }
    return Q;
}

}  // namespace haarforge

#endif
