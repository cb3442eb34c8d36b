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

// Acceptance runner: one line per criterion, "criterion <n> PASS|FAIL <details> [<seconds> s]".
// Usage: haarforge_acceptance [n ...]; no arguments runs all criteria.

#include <boost/math/special_functions/bessel.hpp>
#include <chrono>
#include <iomanip>
#include <iostream>

#include "haarforge/checks.hpp"

using namespace haarforge;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
}

Outcome from_checks(const std::vector<CheckResult> &checks) {
    Outcome o{true, ""};
    for (const auto &c : checks) {
        o.pass &= c.pass;
        o.detail += (o.detail.empty() ? "" : "; ") + c.to_json().dump();
    }
    return o;
}

Outcome c1() {
    return from_checks({check_diagram_mult(2, 5)});
}

Outcome c2() {
    Outcome o{true, ""};
    for (int N : {3, 4, 5, 6}) {
        int r = diagram_gram_rank(2, N);
        o.pass &= N == 3 ? r < 15 : r == 15;
        o.detail += "N=" + std::to_string(N) + " rank=" + std::to_string(r) + " ";
    }
    return o;
}

Outcome c3() {
    return from_checks({check_diagram_mobius(2, 4)});
}

Outcome c4() {
    return from_checks({check_projector(1, 5), check_projector(2, 5)});
}

Outcome c5() {
    Outcome o{true, ""};
    for (int m : {2, 3, 4, 8, 16}) {
        double th = find_theta(m);
        double v = std::abs(char_fn(KMSpec(m), th));
        o.pass &= v <= 1e-9;
        o.detail += "m=" + std::to_string(m) + " theta=" + fmt(th) + " |v|=" + fmt(v) + " ";
    }
    double oracle2 = boost::math::cyl_bessel_j_zero(0.0, 1) / std::sqrt(2.0);
    double d2 = std::abs(find_theta(2) - oracle2);
    double big = find_theta(1000000);
    double d_big = std::abs(big - 1.91586);
    o.pass &= d2 <= 1e-6 && d_big <= 1e-4;
    o.detail += "theta2-j0/sqrt2=" + fmt(d2) + " theta(1e6)=" + fmt(big);
    return o;
}

Outcome c6() {
    return from_checks({check_word_weights(2, find_theta(2), 12, 16, {6, 0})});
}

Outcome c7() {
    std::vector<double> x, y;
    std::string d;
    for (int N : {8, 16, 32, 64}) {
        auto g = ginibre_moment_structured(2, N);
        auto h = haar_moment_structured(2, N);
        double rel = moment_distance(g, h, NormKind::frobenius) / h.frobenius_norm();
        x.push_back(std::log(N));
        y.push_back(std::log(rel));
        d += "N=" + std::to_string(N) + " rel=" + fmt(rel) + " ";
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); i++) mx += x[i] / x.size(), my += y[i] / y.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); i++) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    double slope = sxy / sxx;
    return {slope >= -1.3 && slope <= -0.7, d + "slope=" + fmt(slope)};
}

Outcome c8() {
    std::vector<double> v, se;
    std::string d;
    std::vector<int> ms{2, 4, 8, 16};
    StreamSeed root{8, 0};
    for (size_t i = 0; i < ms.size(); i++) {
        int m = ms[i];
        std::vector<double> w((size_t)m, 1.0 / std::sqrt((double)m));
        double s2 = 0;
        for (double x : w) s2 += x * x;
        for (double &x : w) x /= std::sqrt(s2);
        ExperimentRecord r = lindeberg_experiment(w, 2, 64, 10000, root.child(i));
        v.push_back(r.extra["d2"].get<double>());
        se.push_back(r.extra["d2_se"].get<double>());
        d += "m=" + std::to_string(m) + " d2=" + fmt(v.back()) + "+-" + fmt(se.back()) + " ";
    }
    MonotoneSummary s = monotone_check(v, se, true);
    return {s.holds, d};
}

Outcome c9() {
    std::vector<FreeWord> ws{FreeWord::parse("1"), FreeWord::parse("2"), FreeWord::parse("2,1")};
    std::vector<int> Ns;
    for (int e = 6; e <= 12; e++) Ns.push_back(1 << e);
    auto recs = freeness_experiment(ws, Ns, 100000, {9, 0});
    std::vector<double> scaled;
    std::string d;
    double lc = 0;
    for (const auto &r : recs) {
        double s = r.value * r.config["N"].get<double>();
        scaled.push_back(s);
        lc += std::log(s);
        d += "N=" + std::to_string(r.config["N"].get<int>()) + " tv=" + fmt(r.value) + " ";
    }
    double c = std::exp(lc / scaled.size());
    double worst = 1;
    for (double s : scaled) worst = std::max(worst, std::max(s / c, c / s));
    return {worst <= 2.0, d + "c=" + fmt(c) + " max_factor=" + fmt(worst)};
}

Outcome c10() {
    Outcome o{true, ""};
    EnsembleConfig base;
    base.N = 16;
    base.m = 2;
    base.ell = 8;
    base.k = 2;
    Estimate fp = frame_potential(make_sampler("V", base), 2, 10000, {10, 0});
    bool fp_ok = std::abs(fp.value - 2.0) <= 3 * fp.std_error;
    o.detail += "FP=" + fmt(fp.value) + "+-" + fmt(fp.std_error) + " ";
    auto sweep = [&](const std::vector<EnsembleConfig> &cells, uint64_t stream, const std::string &label) {
        auto recs = design_report(cells, 10000, {10, stream});
        std::vector<double> v, se;
        for (const auto &r : recs) {
            v.push_back(r.value);
            se.push_back(r.std_error);
            o.detail += label + "=" + r.config[label].dump() + " d2=" + fmt(r.value) + "+-" + fmt(r.std_error) + " ";
        }
        return monotone_check(v, se, false).holds;
    };
    std::vector<EnsembleConfig> ells, Ns;
    for (int ell : {1, 2, 4, 8}) {
        EnsembleConfig c = base;
        c.ell = ell;
        ells.push_back(c);
    }
    for (int N : {8, 16, 32}) {
        EnsembleConfig c = base;
        c.N = N;
        Ns.push_back(c);
    }
    bool ell_ok = sweep(ells, 1, "ell");
    bool n_ok = sweep(Ns, 2, "N");
    o.pass = fp_ok && ell_ok && n_ok;
    o.detail += std::string("fp_ok=") + (fp_ok ? "1" : "0") + " ell_ok=" + (ell_ok ? "1" : "0") +
                " N_ok=" + (n_ok ? "1" : "0");
    return o;
}

Outcome c11() {
    return from_checks({check_irrep_basis(2, IntegerPartition({1}), 5)});
}

Outcome c12() {
    Outcome o{true, ""};
    for (const char *s : {"classic", "largeN", "poles"}) {
        MarkovSuiteReport r = markov_suite(s, 500, {12, 0});
        o.pass &= r.passed();
        o.detail += std::string(s) + ": violations=" + std::to_string(r.violations) + " max_ratio=" + fmt(r.max_ratio) +
                    " witness_err=" + fmt(r.witness_max_error) + " ";
    }
    return o;
}

Outcome c13() {
    return from_checks({check_kwise_phase_moments(3, 2), check_kwise_l1_uniform(4, 2)});
}

}  // namespace

int main(int argc, char **argv) {
    const std::vector<std::function<Outcome()>> all{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13};
    std::vector<int> which;
    for (int i = 1; i < argc; i++) {
        int n = std::atoi(argv[i]);
        if (n < 1 || n > (int)all.size()) {
            std::cerr << "unknown criterion: " << argv[i] << "\n";
            return 2;
        }
        which.push_back(n);
    }
    if (which.empty()) {
        for (int i = 1; i <= (int)all.size(); i++) which.push_back(i);
    }
    bool ok = true;
    for (int n : which) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[(size_t)n - 1]();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << " ["
                  << std::fixed << std::setprecision(2) << secs << " s]" << std::defaultfloat << std::endl;
        ok &= o.pass;
    }
    return ok ? 0 : 1;
}
