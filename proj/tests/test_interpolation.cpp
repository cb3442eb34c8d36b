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

#include "haarforge/interpolation.hpp"

using namespace haarforge;

TEST(Polynomial, EvalAndDerivative) {
    Polynomial p({1, -2, 3});
    EXPECT_DOUBLE_EQ(p(2.0), 9.0);
    EXPECT_EQ(p.derivative().coeffs(), (std::vector<double>{-2, 6}));
    EXPECT_EQ(Polynomial({1, 0, 0}).degree(), 0);
}

TEST(Markov, Monomial) {
    for (int d = 1; d <= 10; d++) {
        std::vector<double> c((size_t)d + 1, 0.0);
        c.back() = 1;
        MarkovReport r = markov_check(Polynomial(c), d);
        EXPECT_TRUE(r.holds);
        EXPECT_NEAR(r.ratio, d, 1e-9);
    }
}

TEST(Markov, ChebyshevIsTight) {
    for (int d = 1; d <= 12; d++) {
        Polynomial t = chebyshev_witness(d);
        EXPECT_NEAR(t(1.0), 1.0, 1e-9);
        EXPECT_NEAR(t.derivative()(1.0), 2.0 * d * d, 1e-6);
        MarkovReport r = markov_check(t, d);
        EXPECT_TRUE(r.holds);
        EXPECT_NEAR(r.ratio, 2.0 * d * d, 1e-6 * d * d);
    }
    EXPECT_LE(witness_error(), 1e-6);
}

TEST(Markov, RandomDegreeTen) {
    Rng rng(1);
    for (int t = 0; t < 1000; t++) {
        Polynomial f(gaussian_coeffs(11, rng));
        ASSERT_TRUE(markov_check(f, 10, 20000).holds);
    }
}

TEST(Markov, Preconditions) {
    EXPECT_THROW(markov_check(Polynomial({0, 0, 1}), 1), DomainError);
    EXPECT_THROW(markov_check(Polynomial({1}), 31), DomainError);
}

TEST(LargeN, Examples) {
    EXPECT_EQ(large_N_check(Polynomial({3}), 0, 4).lhs, 0.0);
    LargeNReport r = large_N_check(Polynomial({0, 1}), 1, 4);
    EXPECT_TRUE(r.holds);
    EXPECT_DOUBLE_EQ(r.lhs, 1.0);
    EXPECT_DOUBLE_EQ(r.sup_f, 0.25);
    EXPECT_DOUBLE_EQ(r.rhs, 4.0);
    EXPECT_THROW(large_N_check(Polynomial({0, 0, 1}), 2, 10), DomainError);
}

TEST(LargeN, RandomDegreeFive) {
    Rng rng(2);
    for (int t = 0; t < 100; t++) ASSERT_TRUE(large_N_check(Polynomial(gaussian_coeffs(6, rng)), 5, 101).holds);
}

TEST(Poles, SinglePole) {
    RationalPolyN rp{{1.0}, {{2, 1}}};
    EXPECT_EQ(rp.degree(), 1);
    EXPECT_DOUBLE_EQ(rp.at_N(12), 0.1);
    EXPECT_DOUBLE_EQ(rp.at_infinity(), 0.0);
    LargeNReport r = clustered_pole_check(rp, 16);
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(r.lhs, 16.0 / 14.0, 1e-12);
    EXPECT_LT(r.ratio, 0.2);
    EXPECT_THROW(clustered_pole_check(rp, 15), DomainError);
}

TEST(Poles, PolynomialCaseMatchesLargeN) {
    // Poles at 0 only: f(1/N) = a(N)/N^d is a polynomial in 1/N.
    RationalPolyN rp{{0.5, -1.0, 2.0}, {{0, 2}}};
    LargeNReport a = clustered_pole_check(rp, 8);
    LargeNReport b = large_N_check(Polynomial({2.0, -1.0, 0.5}), 2, 15);
    EXPECT_TRUE(a.holds);
    EXPECT_TRUE(b.holds);
    // sup N |f(1/N) - f(0)| is the limit |f'(0)| = 1.
    EXPECT_NEAR(a.lhs, 1.0, 1e-12);
    EXPECT_NEAR(b.lhs, 1.0, 1e-12);
}

TEST(Poles, Validation) {
    RationalPolyN bad{{1, 1, 1}, {{2, 1}}};
    EXPECT_THROW(bad.validate(), DomainError);
    RationalPolyN zero_mult{{1}, {{2, 0}}};
    EXPECT_THROW(zero_mult.degree(), DomainError);
}

TEST(Suites, ZeroViolations) {
    for (const char *s : {"classic", "largeN", "poles"}) {
        MarkovSuiteReport r = markov_suite(s, 500, {11, 0});
        EXPECT_EQ(r.violations, 0u) << s;
        EXPECT_TRUE(r.passed()) << s;
    }
    EXPECT_THROW(markov_suite("other", 10, {1, 0}), DomainError);
}
