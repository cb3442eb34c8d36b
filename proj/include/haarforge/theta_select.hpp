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

#ifndef HAARFORGE_THETA_SELECT_HPP
#define HAARFORGE_THETA_SELECT_HPP

#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "haarforge/core.hpp"

namespace haarforge {

/// Kesten-McKay law with branching parameter m.
///
/// For m >= 2 the law has density sqrt(4(m-1)/m - x^2) / (2 pi (1 - x^2/m)) on
/// [-E, E], E = 2 sqrt(1 - 1/m). At m = 1 that density degenerates; the degree-one
/// tree is a single edge, so we use its spectral measure (atoms at +-1).
struct KMSpec {
    double m = 2;

    explicit KMSpec(double m_) : m(m_) {
        if (!(m >= 1)) {
            throw DomainError("KMSpec: m must be >= 1");
        }
    }
    double edge() const {
        return 2.0 * std::sqrt(1.0 - 1.0 / m);
    }
    bool atomic() const {
        return m == 1;
    }
};

inline double km_density(const KMSpec &spec, double x) {
    if (spec.atomic()) {
        return 0.0;
    }
    double e2 = 4.0 * (spec.m - 1.0) / spec.m;
    double r = e2 - x * x;
    if (r <= 0) {
        return 0.0;
    }
    return std::sqrt(r) / (2.0 * kPi * (1.0 - x * x / spec.m));
}

namespace detail {

/// Midpoint rule on the periodic integrand of t in [-pi, pi) after x = E sin t.
/// Returns half the full-period sum, i.e. the integral over [-pi/2, pi/2].
inline double km_periodic_rule(const KMSpec &spec, const std::function<double(double)> &g, int n) {
    double E = spec.edge();
    double e2 = E * E;
    double c = e2 / spec.m;
    double h = 2.0 * kPi / n;
    double s = 0;
    for (int j = 0; j < n; j++) {
        double t = -kPi + (j + 0.5) * h;
        double st = std::sin(t), ct = std::cos(t);
        double den = (1.0 - c) + c * ct * ct;
        s += g(E * st) * e2 * ct * ct / (2.0 * kPi * den);
    }
    return 0.5 * s * h;
}

struct KMQuadrature {
    double value;
    int nodes;
    double last_change;
};

inline KMQuadrature km_integrate(const KMSpec &spec, const std::function<double(double)> &g, double tol) {
    int n = 32;
    double prev = km_periodic_rule(spec, g, n);
    while (n < (1 << 20)) {
        n *= 2;
        double cur = km_periodic_rule(spec, g, n);
        double change = std::abs(cur - prev);
        if (change <= tol * 0.01) {
            return {cur, n, change};
        }
        prev = cur;
    }
    std::ostringstream msg;
    msg << "Kesten-McKay quadrature did not converge: m=" << spec.m << " nodes=" << n;
    throw NumericError(msg.str());
}

}  // namespace detail

/// Total mass of the law; 1 for every valid m.
inline double km_total_mass(const KMSpec &spec) {
    if (spec.atomic()) {
        return 1.0;
    }
    return detail::km_integrate(spec, [](double) { return 1.0; }, 1e-12).value;
}

/// v_m(theta) = integral of cos(theta x) p_m(x) dx.
inline double char_fn(const KMSpec &spec, double theta) {
    if (spec.atomic()) {
        return std::cos(theta);
    }
    return detail::km_integrate(spec, [theta](double x) { return std::cos(theta * x); }, 1e-10).value;
}

/// Smallest positive zero of v_m. Scan [0, 8] with step 0.05, then bisect to 1e-12.
inline double find_theta_km(double m) {
    KMSpec spec(m);
    const double step = 0.05;
    double a = 0.0;
    double fa = char_fn(spec, a);
    for (double b = step; b <= 8.0 + 1e-12; b += step) {
        double fb = char_fn(spec, b);
        if (fb == 0.0) {
            return b;
        }
        if ((fa > 0) != (fb > 0)) {
            double lo = a, hi = b, flo = fa;
            while (hi - lo > 1e-12) {
                double mid = 0.5 * (lo + hi);
                double fm = char_fn(spec, mid);
                if ((fm > 0) == (flo > 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            double root = 0.5 * (lo + hi);
            double v = char_fn(spec, root);
            if (std::abs(v) > 1e-9) {
                std::ostringstream msg;
                msg << "find_theta: residual " << v << " at theta=" << root << " for m=" << m;
                throw NumericError(msg.str());
            }
            return root;
        }
        a = b;
        fa = fb;
    }
    std::ostringstream msg;
    msg << "find_theta: no sign change of v_m in [0, 8] for m=" << m;
    throw NumericError(msg.str());
}

/// Cached find_theta for integer m.
inline double find_theta(int m) {
    if (m < 1) {
        throw DomainError("find_theta: m must be >= 1");
    }
    static std::mutex mu;
    static std::map<int, double> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(m);
        if (it != cache.end()) {
            return it->second;
        }
    }
    double t = find_theta_km(m);
    std::lock_guard<std::mutex> lock(mu);
    cache[m] = t;
    return t;
}

/// Angle at which e^{i theta A_m} has vanishing normalized trace for large N.
///
/// A_m built from m phased permutations is a 2m-regular weighted graph, so its
/// limiting spectrum is the Kesten-McKay law of degree 2m.
inline double find_traceless_theta(int m) {
    if (m < 1) {
        throw DomainError("find_traceless_theta: m must be >= 1");
    }
    return find_theta(2 * m);
}

}  // namespace haarforge

#endif
