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

#include "haarforge/free_words.hpp"
#include "haarforge/matrix_engine.hpp"
#include "haarforge/theta_select.hpp"

using namespace haarforge;

TEST(FreeWord, ParseAndPrint) {
    FreeWord w = FreeWord::parse("2,-1,3");
    EXPECT_EQ(w.length(), 3u);
    EXPECT_EQ(w.str(), "Z2Z1'Z3");
    EXPECT_EQ(w.max_generator(), 3);
    EXPECT_EQ(FreeWord::parse("").str(), "I");
    EXPECT_THROW(FreeWord::parse("1,-1"), DomainError);
    EXPECT_THROW(FreeWord::parse("0"), DomainError);
}

TEST(FreeWord, InverseAndReduction) {
    FreeWord w = FreeWord::parse("1,2,-3");
    EXPECT_TRUE(reduce_concat(w, w.inverse()).empty());
    EXPECT_EQ(reduce_concat(FreeWord::parse("1,2"), FreeWord::parse("-2,3")), FreeWord::parse("1,3"));
    EXPECT_EQ(reduce_concat(FreeWord::parse("1"), FreeWord::parse("1")), FreeWord::parse("1,1"));
}

TEST(WordCount, Formula) {
    // 1 + 2m sum_{L<d} (2m-1)^L
    EXPECT_EQ(reduced_word_count(2, 0), 1u);
    EXPECT_EQ(reduced_word_count(2, 1), 5u);
    EXPECT_EQ(reduced_word_count(2, 2), 17u);
    EXPECT_EQ(reduced_word_count(1, 5), 11u);
}

TEST(Expand, CountsAndDegreeOne) {
    double th = 0.7;
    WordCoefficients wc = expand_exponential(2, th, 1);
    EXPECT_EQ(wc.weights.size(), 4u);
    for (const auto &[w, c] : wc.weights) EXPECT_NEAR(std::abs(c), th / 2, 1e-15);
    EXPECT_NEAR(std::abs(wc.identity_coeff - 1.0), 0.0, 1e-15);
}

TEST(Expand, IdentityCoefficientIsTraceLimit) {
    // v(theta) = sum_p (i theta)^p/p! E[x^p] over the 2m-regular Kesten-McKay law.
    double th = 1.2;
    int m = 3;
    WordCoefficients wc = expand_exponential(m, th, 9);
    double ref = char_fn(KMSpec(2 * m), th);
    EXPECT_NEAR(wc.identity_coeff.real(), ref, 20 * taylor_tail_bound(m, th, 9) + 1e-12);
    EXPECT_NEAR(wc.identity_coeff.imag(), 0.0, 1e-14);
}

TEST(Expand, SumOfSquaresNearOne) {
    double th = find_theta(2);
    for (int d : {8, 10, 12}) {
        WordCoefficients wc = expand_exponential(2, th, d);
        WeightStats ws = weight_stats(wc);
        double total = ws.sum_sq + std::norm(wc.identity_coeff);
        EXPECT_NEAR(total, 1.0, 4 * taylor_tail_bound(2, th, d)) << d;
        EXPECT_LE(ws.max_abs, 1.0 / std::sqrt(2.0) + 1e-9);
    }
}

TEST(Expand, TracelessAngleKillsIdentity) {
    WordCoefficients wc = expand_exponential(2, find_traceless_theta(2), 12);
    EXPECT_LE(std::abs(wc.identity_coeff), 1e-4);
}

TEST(Expand, BudgetAndDomain) {
    EXPECT_THROW(expand_exponential(8, 1.0, 12), ResourceError);
    EXPECT_THROW(expand_exponential(0, 1.0, 3), DomainError);
    EXPECT_THROW(expand_exponential(2, 1.0, -1), DomainError);
}

TEST(Realize, DenseMatchesTaylor) {
    Rng rng(4);
    const int m = 2, d = 9;
    double th = find_theta(m);
    std::vector<PhasedPermutation> zs;
    for (int a = 0; a < m; a++) zs.push_back(sample_phased_permutation(10, rng));
    WordCoefficients wc = expand_exponential(m, th, d);
    DenseOperator ref = truncated_taylor(build_A_m(zs), th, d);
    EXPECT_LE(max_abs_entry(realize_expansion(wc, zs) - ref), 1e-10);
    DenseOperator slow = DenseOperator::Identity(10, 10) * wc.identity_coeff;
    for (const auto &[w, c] : wc.weights) slow += c * realize_word(w, zs);
    EXPECT_LE(max_abs_entry(slow - ref), 1e-10);
}

TEST(Realize, WordMatchesProduct) {
    Rng rng(6);
    std::vector<PhasedPermutation> zs{sample_phased_permutation(7, rng), sample_phased_permutation(7, rng)};
    FreeWord w = FreeWord::parse("2,-1,2");
    DenseOperator ref = zs[1].dense() * zs[0].dense().adjoint() * zs[1].dense();
    EXPECT_LE(max_abs_entry(realize_word(w, zs) - ref), 1e-14);
    EXPECT_LE(max_abs_entry(realize_word_phased(w, zs).dense() - ref), 1e-14);
    EXPECT_THROW(realize_word(FreeWord::parse("3"), zs), DomainError);
}

TEST(Product, DisjointAlphabets) {
    WordCoefficients a = expand_exponential(1, 0.4, 3, 1);
    WordCoefficients b = expand_exponential(1, 0.4, 3, 2);
    WordCoefficients p = product_words({a, b});
    EXPECT_EQ(p.weights.size(), (a.weights.size() + 1) * (b.weights.size() + 1) - 1);
    EXPECT_THROW(product_words({a, a}), DomainError);
    WordCoefficients c = expand_exponential(1, 0.4, 3, 1);
    EXPECT_THROW(product_words({}), DomainError);
    (void)c;
}
