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

#include <gtest/gtest.h>

#include "haarforge/matrix_engine.hpp"

using namespace haarforge;

TEST(EnsembleConfig, DefaultsAndValidation) {
    EnsembleConfig c;
    EXPECT_EQ(c.N, 16);
    EXPECT_EQ(c.m, 2);
    EXPECT_EQ(c.ell, 4);
    EXPECT_EQ(c.k, 2);
    EXPECT_NO_THROW(c.validate());
    EXPECT_NEAR(c.resolved_theta(), find_theta(2), 0);
    c.theta = 0.5;
    EXPECT_EQ(c.resolved_theta(), 0.5);
    c.m = 0;
    EXPECT_THROW(c.validate(), DomainError);
    EnsembleConfig d;
    d.N = 3;
    EXPECT_THROW(d.require_stable_range(), DomainError);
}

TEST(BuildA, HermitianAndNormalized) {
    Rng rng(1);
    std::vector<PhasedPermutation> zs;
    for (int i = 0; i < 3; i++) zs.push_back(sample_phased_permutation(12, rng));
    DenseOperator A = build_A_m(zs);
    EXPECT_LE(hermiticity_defect(A), 1e-15);
    // tr(A^2)/N = 1 up to fixed points.
    DenseOperator sum = DenseOperator::Zero(12, 12);
    for (const auto &z : zs) sum += z.dense() + z.dense().adjoint();
    EXPECT_LE(max_abs_entry(A - sum / std::sqrt(6.0)), 1e-15);
}

TEST(Expm, MatchesTaylorAndIsUnitary) {
    Rng rng(2);
    std::vector<PhasedPermutation> zs{sample_phased_permutation(8, rng), sample_phased_permutation(8, rng)};
    DenseOperator A = build_A_m(zs);
    DenseOperator E = expm_hermitian(A, 1.3);
    EXPECT_LE(unitarity_defect(E), 1e-12);
    EXPECT_LE(max_abs_entry(E - truncated_taylor(A, 1.3, 40)), 1e-12);
    DenseOperator bad = DenseOperator::Zero(2, 2);
    bad(0, 1) = 1.0;
    EXPECT_THROW(expm_hermitian(bad, 1.0), DomainError);
}

TEST(Taylor, DegreeZeroAndDefault) {
    DenseOperator H = DenseOperator::Identity(3, 3);
    EXPECT_LE(max_abs_entry(truncated_taylor(H, 2.0, 0) - H), 0.0);
    EXPECT_THROW(truncated_taylor(H, 1.0, -1), DomainError);
    EXPECT_EQ(default_taylor_degree(4, 2, 4), (int)std::ceil(2.0 * std::log(8 / 1e-8)) + 4);
}

TEST(BuildV, UnitaryAndSeeded) {
    EnsembleConfig c;
    c.N = 8;
    c.ell = 3;
    Rng r1(5), r2(5);
    DenseOperator V1 = build_V(c, r1);
    DenseOperator V2 = build_V(c, r2);
    EXPECT_LE(unitarity_defect(V1), 1e-10);
    EXPECT_EQ(max_abs_entry(V1 - V2), 0.0);
}

TEST(BuildV, EllZeroIsPhasedPermutation) {
    EnsembleConfig c;
    c.N = 6;
    c.ell = 0;
    Rng rng(3);
    DenseOperator V = build_V(c, rng);
    for (Eigen::Index j = 0; j < 6; j++) {
        int nz = 0;
        for (Eigen::Index i = 0; i < 6; i++) nz += std::abs(V(i, j)) > 1e-12;
        EXPECT_EQ(nz, 1);
    }
}

TEST(BuildV, TaylorVariantClose) {
    EnsembleConfig c;
    c.N = 8;
    c.ell = 2;
    c.taylor_degree = 30;
    EnsembleConfig e = c;
    e.taylor_degree = 0;
    Rng r1(9), r2(9);
    EXPECT_LE(max_abs_entry(build_V(c, r1) - build_V(e, r2)), 1e-10);
}

TEST(Samplers, HaarAndGinibre) {
    Rng rng(11);
    DenseOperator U = sample_haar(10, rng);
    EXPECT_LE(unitarity_defect(U), 1e-12);
    // E[G^dagger G] = I.
    DenseOperator acc = DenseOperator::Zero(4, 4);
    const int n = 20000;
    for (int i = 0; i < n; i++) {
        DenseOperator G = sample_ginibre(4, rng);
        acc += G.adjoint() * G;
    }
    acc /= n;
    EXPECT_LE(max_abs_entry(acc - DenseOperator::Identity(4, 4)), 0.03);
}
