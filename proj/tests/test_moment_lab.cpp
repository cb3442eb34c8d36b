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

#include "haarforge/moment_lab.hpp"

using namespace haarforge;

TEST(Weingarten, KnownValues) {
    for (int N : {2, 3, 7}) {
        auto w1 = weingarten_matrix(1, N);
        EXPECT_EQ(w1[0][0], Rational(1, N));
        auto w2 = weingarten_matrix(2, N);
        // Order: identity, swap.
        EXPECT_EQ(w2[0][0], Rational(1, N * N - 1));
        EXPECT_EQ(w2[0][1], Rational(-1, N * (N * N - 1)));
    }
    EXPECT_THROW(weingarten_matrix(3, 2), DomainError);
}

TEST(HaarMoment, OrthogonalProjectorOfRankKFactorial) {
    for (auto [k, N] : std::vector<std::pair<int, int>>{{1, 4}, {2, 3}, {2, 5}, {3, 3}}) {
        MomentOperator h = haar_moment_operator(k, N);
        EXPECT_LE(max_abs_entry(h.matrix * h.matrix - h.matrix), 1e-10);
        EXPECT_LE(hermiticity_defect(h.matrix), 1e-12);
        double kf = k == 3 ? 6 : k;
        EXPECT_NEAR(h.matrix.trace().real(), kf, 1e-9);
        EXPECT_NEAR(haar_moment_structured(k, N).frobenius_norm_sq(), kf, 1e-9);
    }
    EXPECT_THROW(haar_moment_operator(4, 4), ResourceError);
}

TEST(GinibreMoment, WickMatchesStructuredAndNorm) {
    for (auto [k, N] : std::vector<std::pair<int, int>>{{1, 5}, {2, 3}, {3, 2}}) {
        MomentOperator w = ginibre_moment_operator(k, N);
        PermutationPairMoment g = ginibre_moment_structured(k, N);
        EXPECT_LE(max_abs_entry(w.matrix - g.to_dense().matrix), 1e-15);
        // ||M_G||^2 = k! sum_rho N^{2 cyc(rho)} / N^{2k}.
        double s = 0;
        for (const auto &r : all_small_perms(k)) s += std::pow((double)N, 2 * perm_cycles(r));
        double kf = k == 3 ? 6 : k;
        EXPECT_NEAR(g.frobenius_norm_sq(), kf * s / std::pow((double)N, 2 * k), 1e-9);
        EXPECT_NEAR(w.matrix.squaredNorm(), g.frobenius_norm_sq(), 1e-9);
    }
}

TEST(GinibreMoment, DecaysLikeOneOverN) {
    std::vector<double> x, y;
    for (int N : {8, 16, 32, 64}) {
        auto g = ginibre_moment_structured(2, N);
        auto h = haar_moment_structured(2, N);
        x.push_back(std::log(N));
        y.push_back(std::log(moment_distance(g, h, NormKind::frobenius) / h.frobenius_norm()));
    }
    double slope = (y.back() - y.front()) / (x.back() - x.front());
    EXPECT_GE(slope, -1.3);
    EXPECT_LE(slope, -0.7);
}

TEST(Distance, StructuredMatchesDense) {
    auto g = ginibre_moment_structured(2, 3);
    auto h = haar_moment_structured(2, 3);
    MomentOperator gd = g.to_dense(), hd = h.to_dense();
    EXPECT_NEAR(moment_distance(g, h, NormKind::frobenius), moment_distance(gd, hd, NormKind::frobenius), 1e-10);
    EXPECT_NEAR(moment_distance(g, h, NormKind::spectral), moment_distance(gd, hd, NormKind::spectral), 1e-10);
    EXPECT_NEAR(structured_inner(g, h), (gd.matrix.adjoint() * hd.matrix).trace().real(), 1e-10);
    MomentOperator other = haar_moment_operator(1, 3);
    EXPECT_THROW(moment_distance(gd, other, NormKind::frobenius), DomainError);
}

TEST(MonteCarlo, HaarAtN2WithinFiveSigma) {
    EnsembleConfig e;
    e.N = 2;
    McMoment mc = mc_moment_operator(make_sampler("haar", e), 2, 2, 100000, {1, 0});
    MomentOperator ref = haar_moment_operator(2, 2);
    for (Eigen::Index i = 0; i < ref.matrix.rows(); i++) {
        for (Eigen::Index j = 0; j < ref.matrix.cols(); j++) {
            double diff = std::abs(mc.mean.matrix(i, j) - ref.matrix(i, j));
            EXPECT_LE(diff, 5 * mc.std_error(i, j) + 1e-12) << i << "," << j;
        }
    }
}

TEST(MonteCarlo, GinibreEntriesAtN16) {
    // Entries of the N = 16, k = 2 moment; the exact values come from the Wick formula.
    const int N = 16, k = 2;
    auto idx = [&](std::vector<int> d) {
        uint64_t r = 0;
        for (int v : d) r = r * N + (uint64_t)v;
        return r;
    };
    std::vector<std::pair<uint64_t, uint64_t>> entries{
        {idx({0, 1, 0, 1}), idx({2, 3, 2, 3})}, {idx({0, 1, 1, 0}), idx({2, 3, 3, 2})},
        {idx({0, 0, 0, 0}), idx({5, 5, 5, 5})}, {idx({0, 1, 0, 1}), idx({2, 3, 3, 2})},
        {idx({4, 7, 4, 7}), idx({4, 7, 4, 7})}, {idx({0, 1, 2, 3}), idx({0, 1, 2, 3})}};
    PermutationPairMoment g = ginibre_moment_structured(k, N);
    auto est = mc_moment_entries([](Rng &r) { return sample_ginibre(N, r); }, k, entries, 100000, {2, 0});
    std::vector<int> o(4), in(4);
    for (const auto &e : est) {
        detail::decode_digits(e.row, N, 4, o, 0);
        detail::decode_digits(e.col, N, 4, in, 0);
        int hits = 0;
        for (const auto &s : all_small_perms(2)) {
            bool ok = true;
            for (int a = 0; a < 2; a++) ok = ok && o[a] == o[2 + s[a]] && in[a] == in[2 + s[a]];
            hits += ok;
        }
        double exact = hits / std::pow((double)N, 2);
        EXPECT_LE(std::abs(e.value - exact), 5 * e.std_error) << e.row << "," << e.col;
    }
    (void)g;
}

TEST(MonteCarlo, ExhaustivePermutationEnsemble) {
    std::vector<DenseOperator> members;
    for (const auto &p : all_permutations(4)) members.push_back(p.dense());
    MomentOperator avg = ensemble_moment_operator(members, 2);
    EXPECT_LE(max_abs_entry(avg.matrix - moment_projector_perm(2, 4).matrix), 1e-12);
}

TEST(MonteCarlo, Reproducible) {
    EnsembleConfig e;
    e.N = 2;
    auto a = mc_moment_operator(make_sampler("ginibre", e), 1, 2, 500, {9, 1});
    auto b = mc_moment_operator(make_sampler("ginibre", e), 1, 2, 500, {9, 1});
    EXPECT_EQ(max_abs_entry(a.mean.matrix - b.mean.matrix), 0.0);
    EXPECT_TRUE(a.std_error.allFinite());
}

TEST(FramePotential, HaarAndFloor) {
    EnsembleConfig e;
    e.N = 8;
    Estimate h = frame_potential(make_sampler("haar", e), 2, 20000, {3, 0});
    EXPECT_LE(std::abs(h.value - 2.0), 3 * h.std_error);
    Estimate p = frame_potential(make_sampler("phased", e), 2, 20000, {4, 0});
    EXPECT_GE(p.value, 2.0 - 3 * p.std_error);
    // Phased permutations at k = 2: |B_4| = 3 once N >= 4.
    EXPECT_LE(std::abs(p.value - 3.0), 4 * p.std_error);
}

TEST(PairStatistic, HaarIsAtZero) {
    EnsembleConfig e;
    e.N = 8;
    PairStatistic ps = pair_statistic_distance(make_sampler("haar", e), haar_moment_structured(2, 8), 3000, {5, 0});
    EXPECT_LE(std::abs(ps.d2.value), 4 * ps.d2.std_error);
}

TEST(PairStatistic, BarePhasedPermutationExact) {
    // ell = 0: d^2 = |B_4| - 2! = 1 for N >= 4.
    EnsembleConfig e;
    e.N = 8;
    e.ell = 0;
    PairStatistic ps = pair_statistic_distance(make_sampler("V", e), haar_moment_structured(2, 8), 3000, {6, 0});
    EXPECT_LE(std::abs(ps.d2.value - 1.0), 4 * ps.d2.std_error);
    EXPECT_GT(ps.d2.std_error, 0.0);
}

TEST(PairStatistic, BlockSizeInvariant) {
    EnsembleConfig e;
    e.N = 4;
    auto s = make_sampler("phased", e);
    auto ref = haar_moment_structured(2, 4);
    auto a = pair_statistic_distance(s, ref, 700, {7, 0}, 512);
    auto b = pair_statistic_distance(s, ref, 700, {7, 0}, 64);
    EXPECT_NEAR(a.d2.value, b.d2.value, 1e-10);
    EXPECT_NEAR(a.d2.std_error, b.d2.std_error, 1e-10);
}

TEST(Lindeberg, SingleTermExact) {
    // One phased permutation against Ginibre: d^2 = |B_4| - 2 * 2! + ||M_G||^2 = 1 + 2/N^2.
    const int N = 16;
    ExperimentRecord r = lindeberg_experiment({1.0}, 2, N, 3000, {8, 0});
    double d2 = r.extra["d2"].get<double>();
    EXPECT_LE(std::abs(d2 - (1 + 2.0 / (N * N))), 4 * r.extra["d2_se"].get<double>());
}

TEST(Lindeberg, BoundAndValidation) {
    for (int m : {2, 4, 8, 16}) {
        std::vector<double> w((size_t)m, 1.0 / std::sqrt((double)m));
        EXPECT_NEAR(lindeberg_bound(w, 2), 1024.0 / m, 1e-9);
    }
    EXPECT_THROW(lindeberg_experiment({0.5, 0.5}, 2, 8, 100, {1, 0}), DomainError);
    EXPECT_THROW(lindeberg_experiment({}, 2, 8, 100, {1, 0}), DomainError);
}

TEST(Monotone, Semantics) {
    EXPECT_TRUE(monotone_check({3, 2, 1}, {0.1, 0.1, 0.1}, true).holds);
    EXPECT_FALSE(monotone_check({3, 2.9, 1}, {0.1, 0.1, 0.1}, true).holds);
    EXPECT_TRUE(monotone_check({1, 1.2, 1.1}, {0.1, 0.1, 0.1}, false).holds);
    EXPECT_FALSE(monotone_check({1, 1.5}, {0.1, 0.1}, false).holds);
}

TEST(Freeness, ExactOracle) {
    std::vector<FreeWord> ws{FreeWord::parse("1"), FreeWord::parse("2"), FreeWord::parse("2,1")};
    for (int N : {2, 3, 4, 5}) EXPECT_NEAR(freeness_tv_exact(ws, N), 2.0 * (N - 1) / (N * N), 1e-15) << N;
    // Distinct generators are exactly independent.
    std::vector<FreeWord> indep{FreeWord::parse("1"), FreeWord::parse("2")};
    EXPECT_NEAR(freeness_tv_exact(indep, 4), 0.0, 1e-15);
}

TEST(Freeness, SampledMatchesExact) {
    std::vector<FreeWord> ws{FreeWord::parse("1,2"), FreeWord::parse("2,-1"), FreeWord::parse("-1,-2,1")};
    double exact = freeness_tv_exact(ws, 4);
    auto rec = freeness_experiment(ws, {4}, 200000, {9, 0});
    EXPECT_NEAR(rec[0].value, exact, 0.01);
    auto big = freeness_experiment({FreeWord::parse("1"), FreeWord::parse("2"), FreeWord::parse("2,1")}, {1024},
                                   100000, {10, 0});
    EXPECT_NEAR(big[0].value * 1024, 2.0, 0.5);
}

TEST(Freeness, RejectsBadWords) {
    EXPECT_THROW(freeness_experiment({FreeWord::parse("1"), FreeWord::parse("1")}, {8}, 100, {1, 0}), DomainError);
    EXPECT_THROW(freeness_experiment({FreeWord()}, {8}, 100, {1, 0}), DomainError);
    EXPECT_THROW(freeness_tv_exact({FreeWord::parse("1")}, 7), ResourceError);
}
