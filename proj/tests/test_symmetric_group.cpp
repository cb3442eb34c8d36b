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

#include "haarforge/checks.hpp"

using namespace haarforge;

TEST(Hook, MatchesBruteForce) {
    for (int n = 1; n <= 8; n++) {
        for (const auto &sh : enumerate_integer_partitions(n)) {
            EXPECT_EQ(hook_count(sh), BigInt(enumerate_syt(sh).size())) << sh.str();
        }
    }
}

TEST(Hook, PaddedDimension) {
    // lambda* = (1) at N = 5 pads to (4, 1): dimension N - 1.
    EXPECT_EQ(hook_dim(IntegerPartition({1}), 5), BigInt(4));
    EXPECT_EQ(hook_dim(IntegerPartition(), 5), BigInt(1));
    EXPECT_EQ(hook_dim(IntegerPartition({1, 1}), 5), BigInt(6));
}

TEST(Perm, CyclesAndSign) {
    SmallPerm s{1, 2, 0, 4, 3};
    EXPECT_EQ(perm_cycles(s), 2);
    EXPECT_EQ(perm_sign(s), -1);
    EXPECT_EQ(perm_compose(s, perm_inverse(s)), perm_identity(5));
    EXPECT_EQ(all_small_perms(4).size(), 24u);
}

TEST(GroupAlgebra, YoungSymmetrizerIsQuasiIdempotent) {
    for (int n = 1; n <= 4; n++) {
        for (const auto &mu : enumerate_integer_partitions(n)) {
            GroupAlgebraElement p = young_symmetrizer(mu);
            GroupAlgebraElement p2 = p * p;
            // p^2 = (n! / f^mu) p.
            Rational factor = p2.identity_coeff() / p.identity_coeff();
            BigInt fact = 1;
            for (int i = 2; i <= n; i++) fact *= i;
            EXPECT_EQ(factor, Rational(fact, hook_count(mu))) << mu.str();
            EXPECT_TRUE((p2 - p * factor).is_zero()) << mu.str();
        }
    }
}

TEST(GroupAlgebra, RowAndColumnShapes) {
    GroupAlgebraElement row = young_symmetrizer(IntegerPartition({3}));
    GroupAlgebraElement col = young_symmetrizer(IntegerPartition({1, 1, 1}));
    for (const auto &s : all_small_perms(3)) {
        EXPECT_EQ(row.coeff(s), Rational(1));
        EXPECT_EQ(col.coeff(s), Rational(perm_sign(s)));
    }
}

TEST(TableauFrame, Orthogonality) {
    for (const auto &mu : {IntegerPartition({2, 1}), IntegerPartition({3, 1}), IntegerPartition({2, 2})}) {
        TableauFrame f = orthogonal_tableau_frame(mu);
        ASSERT_EQ(f.tableaux.size(), (size_t)hook_count(mu));
        for (size_t a = 0; a < f.u.size(); a++) {
            for (size_t b = 0; b < f.u.size(); b++) {
                Rational ip = group_inner(f.u[a] * f.p, f.u[b] * f.p);
                if (a != b) EXPECT_EQ(ip, Rational(0)) << mu.str();
            }
        }
    }
}

TEST(MFactors, Counts) {
    // k = 2, m = 1: three noncrossing 1-factors.
    EXPECT_EQ(enumerate_m_factors(2, 1, true).size(), 3u);
    EXPECT_EQ(enumerate_m_factors(2, 0, true).size(), 2u);
    for (const auto &w : enumerate_m_factors(3, 2, true)) EXPECT_TRUE(is_m_factor(w.base, 2));
}

TEST(IrrepBasis, DiagonalIsExact) {
    for (auto [k, lam] : std::vector<std::pair<int, IntegerPartition>>{
             {1, IntegerPartition({1})}, {2, IntegerPartition({1})}, {2, IntegerPartition({2})}}) {
        IrrepBasis ib = irrep_basis_small_k(k, lam, 2 * k + 1);
        for (Eigen::Index i = 0; i < ib.gram.rows(); i++) EXPECT_NEAR(std::abs(ib.gram(i, i) - 1.0), 0.0, 1e-10);
    }
}

TEST(IrrepBasis, ExtremeShapesOrthonormal) {
    EXPECT_TRUE(check_irrep_basis(1, IntegerPartition({1}), 4).pass);
    EXPECT_TRUE(check_irrep_basis(2, IntegerPartition(), 5).pass);
    EXPECT_TRUE(check_irrep_basis(2, IntegerPartition({2}), 5).pass);
    EXPECT_TRUE(check_irrep_basis(2, IntegerPartition({1, 1}), 5).pass);
}

TEST(IrrepBasis, SharedTopCounterexample) {
    // omega1 = {1,3},{2},{4} and omega2 = {1},{2,3},{4}: Hat-O_2^dagger Hat-O_1 = (J - I) (x) J,
    // which survives the quotient by J_0 as -N e_1.
    IrrepBasis ib = irrep_basis_small_k(2, IntegerPartition({1}), 5);
    double worst = 0;
    for (Eigen::Index i = 0; i < ib.gram.rows(); i++) {
        for (Eigen::Index j = 0; j < ib.gram.cols(); j++) {
            if (i != j) worst = std::max(worst, std::abs(ib.gram(i, j)));
        }
    }
    EXPECT_NEAR(worst, 0.25, 1e-10);
    EXPECT_NEAR(multiplicative_residual(2, 1, 5), 10.0, 1e-9);
}

TEST(IrrepBasis, Preconditions) {
    EXPECT_THROW(irrep_basis_small_k(2, IntegerPartition({1}), 3), DomainError);
    EXPECT_THROW(irrep_basis_small_k(4, IntegerPartition({1}), 8), ResourceError);
}
