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

#ifndef HAARFORGE_SYMMETRIC_GROUP_HPP
#define HAARFORGE_SYMMETRIC_GROUP_HPP

#include <map>
#include <numeric>

#include <boost/multiprecision/cpp_int.hpp>

#include "haarforge/core.hpp"

namespace haarforge {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct IntegerPartition {
    std::vector<int> parts;

    IntegerPartition() = default;
    explicit IntegerPartition(std::vector<int> p) : parts(std::move(p)) {
        for (size_t i = 0; i < parts.size(); i++) {
            if (parts[i] <= 0) {
                throw DomainError("IntegerPartition: parts must be positive");
            }
            if (i > 0 && parts[i] > parts[i - 1]) {
                throw DomainError("IntegerPartition: parts must be nonincreasing");
            }
        }
    }
    int size() const {
        return std::accumulate(parts.begin(), parts.end(), 0);
    }
    int rows() const {
        return (int)parts.size();
    }
    int first() const {
        return parts.empty() ? 0 : parts[0];
    }
    int column_height(int c) const {
        int h = 0;
        for (int p : parts) {
            if (p > c) h++;
        }
        return h;
    }
    std::string str() const {
        std::string s = "(";
        for (size_t i = 0; i < parts.size(); i++) s += (i ? "," : "") + std::to_string(parts[i]);
        return s + ")";
    }
    bool operator==(const IntegerPartition &o) const = default;
};

inline std::vector<IntegerPartition> enumerate_integer_partitions(int n) {
    std::vector<IntegerPartition> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int rem, int mx) {
        if (rem == 0) {
            out.emplace_back(cur);
            return;
        }
        for (int p = std::min(rem, mx); p >= 1; p--) {
            cur.push_back(p);
            rec(rem - p, p);
            cur.pop_back();
        }
    };
    rec(n, n);
    return out;
}

/// Number of standard Young tableaux of the given shape by the hook-length formula.
inline BigInt hook_count(const IntegerPartition &shape) {
    int n = shape.size();
    BigInt num = 1;
    for (int i = 2; i <= n; i++) num *= i;
    BigInt den = 1;
    for (int r = 0; r < shape.rows(); r++) {
        for (int c = 0; c < shape.parts[(size_t)r]; c++) {
            int arm = shape.parts[(size_t)r] - c - 1;
            int leg = shape.column_height(c) - r - 1;
            den *= (arm + leg + 1);
        }
    }
    return num / den;
}

/// Padded shape (N - |lambda*|, lambda*).
inline IntegerPartition pad_shape(const IntegerPartition &lambda_star, int N) {
    int top = N - lambda_star.size();
    if (top < lambda_star.first()) {
        throw DomainError("padded shape invalid: N - |lambda*| < lambda*_1");
    }
    std::vector<int> p;
    if (top > 0) p.push_back(top);
    p.insert(p.end(), lambda_star.parts.begin(), lambda_star.parts.end());
    return IntegerPartition(p);
}

/// dim S_lambda for lambda = (N - |lambda*|, lambda*).
inline BigInt hook_dim(const IntegerPartition &lambda_star, int N) {
    return hook_count(pad_shape(lambda_star, N));
}

using Tableau = std::vector<std::vector<int>>;

/// All standard tableaux (entries 1..n), ordered by the row of each successive entry.
inline std::vector<Tableau> enumerate_syt(const IntegerPartition &shape) {
    int n = shape.size();
    if (n > 12) {
        throw ResourceError("enumerate_syt: shape too large");
    }
    std::vector<Tableau> out;
    Tableau t((size_t)shape.rows());
    std::function<void(int)> rec = [&](int v) {
        if (v > n) {
            out.push_back(t);
            return;
        }
        for (int r = 0; r < shape.rows(); r++) {
            auto len = (int)t[(size_t)r].size();
            if (len >= shape.parts[(size_t)r]) continue;
            if (r > 0 && (int)t[(size_t)r - 1].size() <= len) continue;
            t[(size_t)r].push_back(v);
            rec(v + 1);
            t[(size_t)r].pop_back();
        }
    };
    rec(1);
    return out;
}

/// Columns filled top to bottom, left to right.
inline Tableau column_reading_tableau(const IntegerPartition &shape) {
    Tableau t((size_t)shape.rows());
    for (int r = 0; r < shape.rows(); r++) t[(size_t)r].resize((size_t)shape.parts[(size_t)r]);
    int v = 1;
    for (int c = 0; c < shape.first(); c++) {
        for (int r = 0; r < shape.column_height(c); r++) t[(size_t)r][(size_t)c] = v++;
    }
    return t;
}

// ---- S_m and its group algebra ------------------------------------------------

/// Permutation of {0..m-1}, images listed.
using SmallPerm = std::vector<int>;

inline SmallPerm perm_identity(int m) {
    SmallPerm p((size_t)m);
    std::iota(p.begin(), p.end(), 0);
    return p;
}
inline SmallPerm perm_compose(const SmallPerm &a, const SmallPerm &b) {
    SmallPerm r(a.size());
    for (size_t i = 0; i < a.size(); i++) r[i] = a[(size_t)b[i]];
    return r;
}
inline SmallPerm perm_inverse(const SmallPerm &a) {
    SmallPerm r(a.size());
    for (size_t i = 0; i < a.size(); i++) r[(size_t)a[i]] = (int)i;
    return r;
}
inline int perm_cycles(const SmallPerm &a) {
    std::vector<char> seen(a.size(), 0);
    int c = 0;
    for (size_t i = 0; i < a.size(); i++) {
        if (seen[i]) continue;
        c++;
        for (size_t j = i; !seen[j]; j = (size_t)a[j]) seen[j] = 1;
    }
    return c;
}
inline std::vector<int> perm_cycle_lengths(const SmallPerm &a) {
    std::vector<char> seen(a.size(), 0);
    std::vector<int> out;
    for (size_t i = 0; i < a.size(); i++) {
        if (seen[i]) continue;
        int len = 0;
        for (size_t j = i; !seen[j]; j = (size_t)a[j]) {
            seen[j] = 1;
            len++;
        }
        out.push_back(len);
    }
    return out;
}
inline int perm_sign(const SmallPerm &a) {
    return ((int)a.size() - perm_cycles(a)) % 2 == 0 ? 1 : -1;
}
inline std::vector<SmallPerm> all_small_perms(int m) {
    SmallPerm p = perm_identity(m);
    std::vector<SmallPerm> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

class GroupAlgebraElement {
   public:
    GroupAlgebraElement() = default;
    explicit GroupAlgebraElement(int m) : m_(m) {
    }
    static GroupAlgebraElement basis(const SmallPerm &s, Rational c = 1) {
        GroupAlgebraElement e((int)s.size());
        if (c != 0) e.terms_[s] = c;
        return e;
    }

    int degree() const {
        return m_;
    }
    const std::map<SmallPerm, Rational> &terms() const {
        return terms_;
    }
    Rational coeff(const SmallPerm &s) const {
        auto it = terms_.find(s);
        return it == terms_.end() ? Rational(0) : it->second;
    }
    Rational identity_coeff() const {
        return coeff(perm_identity(m_));
    }
    bool is_zero() const {
        return terms_.empty();
    }

    GroupAlgebraElement &add(const SmallPerm &s, const Rational &c) {
        require((int)s.size() == m_, "group algebra: degree mismatch");
        Rational &v = terms_[s];
        v += c;
        if (v == 0) terms_.erase(s);
        return *this;
    }
    GroupAlgebraElement operator+(const GroupAlgebraElement &o) const {
        GroupAlgebraElement r = *this;
        for (const auto &[s, c] : o.terms_) r.add(s, c);
        return r;
    }
    GroupAlgebraElement operator-(const GroupAlgebraElement &o) const {
        return *this + o * Rational(-1);
    }
    GroupAlgebraElement operator*(const Rational &a) const {
        GroupAlgebraElement r(m_);
        if (a == 0) return r;
        for (const auto &[s, c] : terms_) r.terms_[s] = c * a;
        return r;
    }
    GroupAlgebraElement operator*(const GroupAlgebraElement &o) const {
        require(m_ == o.m_, "group algebra: degree mismatch");
        GroupAlgebraElement r(m_);
        for (const auto &[s, a] : terms_) {
            for (const auto &[t, b] : o.terms_) r.add(perm_compose(s, t), a * b);
        }
        return r;
    }
    /// sum c_s s -> sum c_s s^{-1} (coefficients are real).
    GroupAlgebraElement adjoint() const {
        GroupAlgebraElement r(m_);
        for (const auto &[s, c] : terms_) r.terms_[perm_inverse(s)] = c;
        return r;
    }
    bool operator==(const GroupAlgebraElement &o) const {
        return m_ == o.m_ && terms_ == o.terms_;
    }

   private:
    int m_ = 0;
    std::map<SmallPerm, Rational> terms_;
};

/// Identity coefficient of x^dagger y.
inline Rational group_inner(const GroupAlgebraElement &x, const GroupAlgebraElement &y) {
    Rational s = 0;
    for (const auto &[p, c] : x.terms()) s += c * y.coeff(p);
    return s;
}

namespace detail {
/// Permutations of {0..m-1} preserving each listed set (entries 1-based).
inline std::vector<SmallPerm> set_stabilizer(int m, const std::vector<std::vector<int>> &sets) {
    std::vector<SmallPerm> out{perm_identity(m)};
    for (const auto &s : sets) {
        std::vector<int> pts = s;
        std::sort(pts.begin(), pts.end());
        std::vector<int> arr = pts;
        std::vector<SmallPerm> next;
        do {
            for (const auto &base : out) {
                SmallPerm q = base;
                for (size_t i = 0; i < pts.size(); i++) q[(size_t)pts[i] - 1] = arr[i] - 1;
                next.push_back(q);
            }
        } while (std::next_permutation(arr.begin(), arr.end()));
        out = std::move(next);
    }
    return out;
}
}  // namespace detail

/// p_mu = sum_{c in C(t_c)} sum_{r in R(t_c)} sgn(c) c r for the column-reading tableau.
inline GroupAlgebraElement young_symmetrizer(const IntegerPartition &mu) {
    int m = mu.size();
    if (m > 5) {
        throw ResourceError("young_symmetrizer: |mu| capped at 5");
    }
    if (m == 0) {
        return GroupAlgebraElement::basis(SmallPerm{});
    }
    Tableau t = column_reading_tableau(mu);
    std::vector<std::vector<int>> rows = t, cols;
    for (int c = 0; c < mu.first(); c++) {
        std::vector<int> col;
        for (int r = 0; r < mu.column_height(c); r++) col.push_back(t[(size_t)r][(size_t)c]);
        cols.push_back(col);
    }
    auto R = detail::set_stabilizer(m, rows);
    auto C = detail::set_stabilizer(m, cols);
    GroupAlgebraElement p(m);
    for (const auto &c : C) {
        int sg = perm_sign(c);
        for (const auto &r : R) p.add(perm_compose(c, r), Rational(sg));
    }
    return p;
}

/// sigma with sigma(t_from(box)) = t_to(box), 0-based.
inline SmallPerm tableau_permutation(const Tableau &t_from, const Tableau &t_to) {
    int m = 0;
    for (const auto &row : t_from) m += (int)row.size();
    SmallPerm s((size_t)m, -1);
    for (size_t r = 0; r < t_from.size(); r++) {
        require(t_to[r].size() == t_from[r].size(), "tableaux shapes differ");
        for (size_t c = 0; c < t_from[r].size(); c++) s[(size_t)t_from[r][c] - 1] = t_to[r][c] - 1;
    }
    return s;
}

struct TableauFrame {
    IntegerPartition mu;
    std::vector<Tableau> tableaux;  // column-reading tableau first
    GroupAlgebraElement p;          // Young symmetrizer
    std::vector<GroupAlgebraElement> u;  // exact, y_t = u_t p orthogonal
    std::vector<double> scale;      // scale_t^2 <y_t, y_t> = f^mu / m!
};

/// Sequential Gram-Schmidt of sigma_t p_mu in exact arithmetic.
inline TableauFrame orthogonal_tableau_frame(const IntegerPartition &mu) {
    TableauFrame f;
    f.mu = mu;
    f.p = young_symmetrizer(mu);
    int m = mu.size();
    Tableau tc = column_reading_tableau(mu);
    auto all = enumerate_syt(mu);
    f.tableaux.push_back(tc);
    for (auto &t : all) {
        if (t != tc) f.tableaux.push_back(t);
    }
    BigInt fact = 1;
    for (int i = 2; i <= m; i++) fact *= i;
    Rational target = Rational(hook_count(mu)) / Rational(fact);
    std::vector<GroupAlgebraElement> ys;
    for (const auto &t : f.tableaux) {
        GroupAlgebraElement u = GroupAlgebraElement::basis(tableau_permutation(tc, t));
        GroupAlgebraElement y = u * f.p;
        for (size_t s = 0; s < ys.size(); s++) {
            Rational coef = group_inner(ys[s], y) / group_inner(ys[s], ys[s]);
            y = y - ys[s] * coef;
            u = u - f.u[s] * coef;
        }
        Rational nn = group_inner(y, y);
        if (nn == 0) {
            throw NumericError("tableau vectors are linearly dependent");
        }
        f.u.push_back(u);
        ys.push_back(y);
        f.scale.push_back(std::sqrt(static_cast<double>(target / nn)));
    }
    return f;
}

}  // namespace haarforge

#endif
