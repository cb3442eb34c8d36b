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

#ifndef HAARFORGE_INTERPOLATION_HPP
#define HAARFORGE_INTERPOLATION_HPP

#include <cmath>
#include <vector>

#include "haarforge/core.hpp"

namespace haarforge {

/// Real polynomial, coefficients from the constant term up.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
        while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
        if (c_.empty()) c_.push_back(0.0);
    }

    int degree() const {
        return (int)c_.size() - 1;
    }
    const std::vector<double> &coeffs() const {
        return c_;
    }

    double operator()(double x) const {
        double v = 0;
        for (size_t i = c_.size(); i-- > 0;) v = v * x + c_[i];
        return v;
    }

    Polynomial derivative() const {
        if (c_.size() == 1) return Polynomial({0.0});
        std::vector<double> d(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); i++) d[i - 1] = (double)i * c_[i];
        return Polynomial(d);
    }

    /// Upper bound for sup |p| on [0, 1].
    double abs_coeff_sum() const {
        double s = 0;
        for (double v : c_) s += std::abs(v);
        return s;
    }

    Polynomial operator*(const Polynomial &o) const {
        std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
        for (size_t i = 0; i < c_.size(); i++) {
            for (size_t j = 0; j < o.c_.size(); j++) r[i + j] += c_[i] * o.c_[j];
        }
        return Polynomial(r);
    }
    Polynomial operator-(const Polynomial &o) const {
        std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
        for (size_t i = 0; i < c_.size(); i++) r[i] += c_[i];
        for (size_t i = 0; i < o.c_.size(); i++) r[i] -= o.c_[i];
        return Polynomial(r);
    }
    Polynomial scaled(double s) const {
        std::vector<double> r = c_;
        for (auto &v : r) v *= s;
        return Polynomial(r);
    }

private:
    std::vector<double> c_{0.0};
};

/// T_d(2x - 1), extremal for the derivative bound on [0, 1].
inline Polynomial chebyshev_witness(int d) {
    if (d < 0) {
        throw DomainError("chebyshev_witness: d must be >= 0");
    }
    Polynomial t0({1.0}), t1({-1.0, 2.0});
    if (d == 0) return t0;
    Polynomial two_s({-2.0, 4.0});
    for (int n = 1; n < d; n++) {
        Polynomial t2 = two_s * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    return t1;
}

struct MarkovReport {
    bool holds = true;
    double lhs = 0;  // lower bound on the left side
    double rhs = 0;  // upper bound on the right side
    double ratio = 0;
    json to_json() const {
        return json{{"holds", holds}, {"lhs", lhs}, {"rhs", rhs}, {"ratio", ratio}};
    }
};

/// sup|f'| <= 2 d^2 sup|f| on [0, 1], checked on a grid of `grid` points.
inline MarkovReport markov_check(const Polynomial &f, int d, size_t grid = 100000) {
    if (d < 0 || d > 30 || f.degree() > d) {
        throw DomainError("markov_check: need degree <= d <= 30");
    }
    if (grid < 2) grid = 2;
    Polynomial fp = f.derivative();
    Polynomial fpp = fp.derivative();
    double sup_f = 0, sup_fp = 0;
    for (size_t i = 0; i < grid; i++) {
        double x = (double)i / (double)(grid - 1);
        sup_f = std::max(sup_f, std::abs(f(x)));
        sup_fp = std::max(sup_fp, std::abs(fp(x)));
    }
    double h = 0.5 / (double)(grid - 1);
    double fp_upper = std::min(fp.abs_coeff_sum(), sup_fp + h * fpp.abs_coeff_sum());
    double f_upper = sup_f + h * fp_upper;
    MarkovReport r;
    r.lhs = sup_fp;
    r.rhs = 2.0 * d * d * f_upper;
    r.ratio = sup_f > 0 ? sup_fp / sup_f : 0.0;
    r.holds = !(r.lhs > r.rhs * (1 + 1e-12));
    return r;
}

/// f(1/N) = a(N) / prod (N - b_i)^{m_i}; a given by coefficients in powers of N.
struct RationalPolyN {
    std::vector<double> numerator;
    std::vector<std::pair<int, int>> poles;

    int degree() const {
        int d = 0;
        for (const auto &[b, m] : poles) {
            if (m < 1) throw DomainError("RationalPolyN: multiplicity must be >= 1");
            d += m;
        }
        return d;
    }
    int pole_bound() const {
        int B = 0;
        for (const auto &[b, m] : poles) B = std::max(B, std::abs(b));
        return B;
    }
    void validate() const {
        int d = degree();
        Polynomial a(numerator);
        if (a.degree() > d) {
            throw DomainError("RationalPolyN: numerator degree exceeds denominator degree");
        }
    }

    /// Numerator in x = 1/N: a~(x) = x^d a(1/x).
    Polynomial numerator_in_x() const {
        int d = degree();
        std::vector<double> c((size_t)d + 1, 0.0);
        for (size_t j = 0; j < numerator.size(); j++) {
            if (numerator[j] == 0.0) continue;
            if ((int)j > d) throw DomainError("RationalPolyN: numerator degree exceeds denominator degree");
            c[(size_t)d - j] = numerator[j];
        }
        return Polynomial(c);
    }

    double at_N(double N) const {
        double a = Polynomial(numerator)(N);
        double b = 1;
        for (const auto &[p, m] : poles) b *= std::pow(N - p, m);
        return a / b;
    }
    double at_infinity() const {
        return numerator_in_x()(0.0);
    }

    json to_json() const {
        json p = json::array();
        for (const auto &[b, m] : poles) p.push_back({b, m});
        return json{{"numerator", numerator}, {"poles", p}};
    }
};

namespace detail {

/// f(x) = a(x) / prod (1 - b_i x)^{m_i} for x in [0, 1/N0].
struct XRational {
    Polynomial a;
    std::vector<std::pair<int, int>> poles;

    double operator()(double x) const {
        double den = 1;
        for (const auto &[b, m] : poles) den *= std::pow(1.0 - b * x, m);
        return a(x) / den;
    }
    double derivative_at_zero() const {
        const auto &c = a.coeffs();
        double c0 = c[0], c1 = c.size() > 1 ? c[1] : 0.0;
        double s = 0;
        for (const auto &[b, m] : poles) s += (double)m * b;
        return c1 + c0 * s;
    }
    /// Crude sup |f'| on [0, X] assuming |b_i| X < 1.
    double derivative_bound(double X) const {
        double q = 1, s = 0;
        for (const auto &[b, m] : poles) {
            double g = 1.0 - std::abs(b) * X;
            require(g > 0, "derivative_bound: pole inside interval");
            q *= std::pow(g, m);
            s += (double)m * std::abs(b) / g;
        }
        return (a.derivative().abs_coeff_sum() + a.abs_coeff_sum() * s) / q;
    }
};

struct LargeNReport {
    bool holds = true;
    double lhs = 0;
    double sup_f = 0;
    double rhs = 0;
    double ratio = 0;
    uint64_t points = 0;
    json to_json() const {
        return json{{"holds", holds}, {"lhs", lhs}, {"sup_f", sup_f}, {"rhs", rhs}, {"ratio", ratio}, {"points", points}};
    }
};

/// sup_{N >= N0} N |f(1/N) - f(0)| <= C sup_{N >= N0} |f(1/N)|, with N over [N0, N0 2^10]
/// (all integers when few enough, else a log-uniform sample) and a continuous bound beyond.
inline LargeNReport large_N_core(const XRational &f, uint64_t N0, double C) {
    const uint64_t Nmax = N0 << 10;
    const uint64_t span = Nmax - N0 + 1;
    std::vector<uint64_t> Ns;
    bool full = span <= (1u << 17);
    if (full) {
        for (uint64_t N = N0; N <= Nmax; N++) Ns.push_back(N);
    } else {
        const int P = 1 << 14;
        for (int i = 0; i <= P; i++) {
            auto N = (uint64_t)std::llround((double)N0 * std::pow(2.0, 10.0 * i / P));
            if (Ns.empty() || N != Ns.back()) Ns.push_back(N);
        }
    }
    double f0 = f(0.0);
    LargeNReport r;
    r.points = Ns.size();
    double sup_eval = std::abs(f0);
    r.lhs = std::abs(f.derivative_at_zero());
    for (uint64_t N : Ns) {
        double v = f(1.0 / (double)N);
        sup_eval = std::max(sup_eval, std::abs(v));
        r.lhs = std::max(r.lhs, (double)N * std::abs(v - f0));
    }
    // Continuous upper bound on the remaining range.
    double X = full ? 1.0 / (double)Nmax : 1.0 / (double)N0;
    const int G = 4096;
    double grid_max = 0;
    for (int i = 0; i < G; i++) grid_max = std::max(grid_max, std::abs(f(X * i / (G - 1))));
    double upper = std::max(sup_eval, grid_max + 0.5 * X / (G - 1) * f.derivative_bound(X));
    r.sup_f = sup_eval;
    r.rhs = C * upper;
    r.ratio = C * sup_eval > 0 ? r.lhs / (C * sup_eval) : 0.0;
    r.holds = !(r.lhs > r.rhs * (1 + 1e-12));
    return r;
}

}  // namespace detail

using LargeNReport = detail::LargeNReport;

/// f given as a polynomial in x = 1/N of degree <= d; requires d^2 <= (N0 + 1) / 4.
inline LargeNReport large_N_check(const Polynomial &f, int d, uint64_t N0) {
    if (d < 0 || f.degree() > d) {
        throw DomainError("large_N_check: polynomial degree exceeds d");
    }
    if (N0 < 1 || 4.0 * d * d > (double)N0 + 1) {
        throw DomainError("large_N_check: requires d^2 <= (N0 + 1) / 4");
    }
    return detail::large_N_core({f, {}}, N0, 4.0 * d * d * (double)N0);
}

/// Requires N0 >= 8 d B + d^2 - 1.
inline LargeNReport clustered_pole_check(const RationalPolyN &rp, uint64_t N0) {
    rp.validate();
    int d = rp.degree();
    int B = rp.pole_bound();
    if (d == 0) {
        throw DomainError("clustered_pole_check: denominator degree must be >= 1");
    }
    if ((double)N0 < 8.0 * d * B + (double)d * d - 1 || N0 <= (uint64_t)B) {
        throw DomainError("clustered_pole_check: requires N0 >= 8 d B + d^2 - 1");
    }
    return detail::large_N_core({rp.numerator_in_x(), rp.poles}, N0, 4.0 * d * d * ((double)N0 + 10.0 * d * B));
}

// ---- Randomized suites -------------------------------------------------------------

struct MarkovSuiteReport {
    std::string suite;
    uint64_t trials = 0;
    uint64_t violations = 0;
    double max_ratio = 0;  // largest observed lhs / bound
    double witness_max_error = 0;
    json counterexamples = json::array();

    bool passed() const {
        return violations == 0 && witness_max_error <= 1e-6;
    }
    json to_json() const {
        return json{{"suite", suite},
                    {"trials", trials},
                    {"violations", violations},
                    {"max_ratio", max_ratio},
                    {"witness_max_error", witness_max_error},
                    {"pass", passed()},
                    {"counterexamples", counterexamples}};
    }
};

/// |ratio - 2d^2| maximized over d = 1..max_d for the Chebyshev witness.
inline double witness_error(int max_d = 12) {
    double err = 0;
    for (int d = 1; d <= max_d; d++) {
        Polynomial t = chebyshev_witness(d);
        double sup_f = 0;
        const int G = 20001;
        for (int i = 0; i < G; i++) sup_f = std::max(sup_f, std::abs(t((double)i / (G - 1))));
        double ratio = std::abs(t.derivative()(1.0)) / sup_f;
        err = std::max(err, std::abs(ratio - 2.0 * d * d));
    }
    return err;
}

inline std::vector<double> gaussian_coeffs(int n, Rng &rng) {
    std::normal_distribution<double> g;
    std::vector<double> c((size_t)n);
    for (auto &v : c) v = g(rng);
    return c;
}

/// suite: classic (degree <= 10), largeN (degree 5, N0 = 101), poles (d <= 8, poles in 0..20).
inline MarkovSuiteReport markov_suite(const std::string &suite, uint64_t trials, StreamSeed seed) {
    if (suite != "classic" && suite != "largeN" && suite != "poles") {
        throw DomainError("unknown markov suite: " + suite);
    }
    MarkovSuiteReport rep;
    rep.suite = suite;
    rep.trials = trials;
    rep.witness_max_error = witness_error();
    std::vector<int> bad(trials, 0);
    std::vector<double> ratios(trials, 0.0);
    std::vector<json> dumps(trials);
    parallel_for(trials, [&](size_t t) {
        Rng rng = seed.at(t);
        if (suite == "classic") {
            int d = 1 + (int)uniform_below(rng, 10);
            Polynomial f(gaussian_coeffs(d + 1, rng));
            auto r = markov_check(f, d);
            ratios[t] = r.lhs / r.rhs;
            if (!r.holds) {
                bad[t] = 1;
                dumps[t] = {{"coeffs", f.coeffs()}, {"d", d}, {"report", r.to_json()}};
            }
        } else if (suite == "largeN") {
            int d = 5;
            Polynomial f(gaussian_coeffs(d + 1, rng));
            auto r = large_N_check(f, d, 101);
            ratios[t] = r.lhs / r.rhs;
            if (!r.holds) {
                bad[t] = 1;
                dumps[t] = {{"coeffs", f.coeffs()}, {"d", d}, {"N0", 101}, {"report", r.to_json()}};
            }
        } else {
            int d = 1 + (int)uniform_below(rng, 8);
            RationalPolyN rp;
            int left = d;
            while (left > 0) {
                int m = 1 + (int)uniform_below(rng, (uint64_t)left);
                rp.poles.emplace_back((int)uniform_below(rng, 21), m);
                left -= m;
            }
            int na = 1 + (int)uniform_below(rng, (uint64_t)d + 1);
            rp.numerator = gaussian_coeffs(na, rng);
            int B = rp.pole_bound();
            auto N0 = (uint64_t)std::max(8 * d * B + d * d - 1, B + 1);
            auto r = clustered_pole_check(rp, N0);
            ratios[t] = r.lhs / r.rhs;
            if (!r.holds) {
                bad[t] = 1;
                dumps[t] = {{"instance", rp.to_json()}, {"N0", N0}, {"report", r.to_json()}};
            }
        }
    });
    for (size_t t = 0; t < trials; t++) {
        rep.max_ratio = std::max(rep.max_ratio, ratios[t]);
        if (bad[t]) {
            rep.violations++;
            if (rep.counterexamples.size() < 10) rep.counterexamples.push_back(dumps[t]);
        }
    }
    return rep;
}

}  // namespace haarforge

#endif
