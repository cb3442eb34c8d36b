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

#ifndef HAARFORGE_PERM_CORE_HPP
#define HAARFORGE_PERM_CORE_HPP

#include <array>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "haarforge/core.hpp"

namespace haarforge {

class Permutation {
   public:
    Permutation() = default;

    explicit Permutation(std::vector<uint32_t> mapping) : map_(std::move(mapping)) {
        std::vector<char> seen(map_.size(), 0);
        for (uint32_t v : map_) {
            if (v >= map_.size() || seen[v]) {
                throw DomainError("mapping is not a bijection");
            }
            seen[v] = 1;
        }
    }

    static Permutation identity(size_t n) {
        std::vector<uint32_t> m(n);
        std::iota(m.begin(), m.end(), 0u);
        Permutation p;
        p.map_ = std::move(m);
        return p;
    }

    size_t size() const {
        return map_.size();
    }
    uint32_t operator[](size_t i) const {
        return map_[i];
    }
    const std::vector<uint32_t> &mapping() const {
        return map_;
    }

    Permutation inverse() const {
        Permutation r;
        r.map_.resize(map_.size());
        for (size_t i = 0; i < map_.size(); i++) {
            r.map_[map_[i]] = (uint32_t)i;
        }
        return r;
    }

    bool is_identity() const {
        for (size_t i = 0; i < map_.size(); i++) {
            if (map_[i] != i) {
                return false;
            }
        }
        return true;
    }

    /// Column i of the permutation matrix is e_{mapping[i]}.
    DenseOperator dense() const {
        DenseOperator m = DenseOperator::Zero((Eigen::Index)size(), (Eigen::Index)size());
        for (size_t i = 0; i < size(); i++) {
            m(map_[i], (Eigen::Index)i) = 1.0;
        }
        return m;
    }

    bool operator==(const Permutation &o) const = default;

   private:
    std::vector<uint32_t> map_;
};

/// (p o q)(i) = p(q(i)); matches the matrix product P*Q.
inline Permutation compose(const Permutation &p, const Permutation &q) {
    require(p.size() == q.size(), "compose: size mismatch");
    std::vector<uint32_t> m(p.size());
    for (size_t i = 0; i < p.size(); i++) {
        m[i] = p[q[i]];
    }
    return Permutation(std::move(m));
}

inline Permutation invert(const Permutation &p) {
    return p.inverse();
}

inline Permutation sample_uniform_permutation(size_t n_elems, Rng &rng) {
    if (n_elems == 0) {
        throw DomainError("sample_uniform_permutation: n_elems must be >= 1");
    }
    std::vector<uint32_t> m(n_elems);
    std::iota(m.begin(), m.end(), 0u);
    for (size_t i = n_elems - 1; i > 0; i--) {
        size_t j = (size_t)uniform_below(rng, i + 1);
        std::swap(m[i], m[j]);
    }
    return Permutation(std::move(m));
}

/// Z = D_z S. Z|i> = phases[S(i)] |S(i)>.
class PhasedPermutation {
   public:
    PhasedPermutation() = default;

    PhasedPermutation(Permutation perm, std::vector<Complex> phases)
        : perm_(std::move(perm)), phases_(std::move(phases)) {
        if (phases_.size() != perm_.size()) {
            throw DomainError("phase count must equal permutation size");
        }
        for (const auto &z : phases_) {
            if (std::abs(std::abs(z) - 1.0) > 1e-12) {
                throw DomainError("phase is not of unit modulus");
            }
        }
    }

    static PhasedPermutation identity(size_t n) {
        return PhasedPermutation(Permutation::identity(n), std::vector<Complex>(n, 1.0));
    }

    size_t dim() const {
        return perm_.size();
    }
    const Permutation &perm() const {
        return perm_;
    }
    const std::vector<Complex> &phases() const {
        return phases_;
    }

    /// Image of basis vector e_i as (index, phase).
    std::pair<uint32_t, Complex> basis_image(uint32_t i) const {
        uint32_t j = perm_[i];
        return {j, phases_[j]};
    }

    PhasedPermutation adjoint() const {
        Permutation inv = perm_.inverse();
        std::vector<Complex> z(dim());
        for (size_t i = 0; i < dim(); i++) {
            z[i] = std::conj(phases_[perm_[i]]);
        }
        return PhasedPermutation(std::move(inv), std::move(z));
    }

    DenseOperator dense() const {
        DenseOperator m = DenseOperator::Zero((Eigen::Index)dim(), (Eigen::Index)dim());
        for (size_t i = 0; i < dim(); i++) {
            uint32_t j = perm_[i];
            m(j, (Eigen::Index)i) = phases_[j];
        }
        return m;
    }

    json to_json() const {
        json ph = json::array();
        for (const auto &z : phases_) {
            ph.push_back(complex_to_json(z));
        }
        return json{{"perm", perm_.mapping()}, {"phases", ph}};
    }

    static PhasedPermutation from_json(const json &j) {
        Permutation p(j.at("perm").get<std::vector<uint32_t>>());
        std::vector<Complex> z;
        for (const auto &e : j.at("phases")) {
            z.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        return PhasedPermutation(std::move(p), std::move(z));
    }

   private:
    Permutation perm_;
    std::vector<Complex> phases_;
};

/// Product a*b as operators.
inline PhasedPermutation compose(const PhasedPermutation &a, const PhasedPermutation &b) {
    require(a.dim() == b.dim(), "compose: dimension mismatch");
    Permutation p = compose(a.perm(), b.perm());
    Permutation ainv = a.perm().inverse();
    std::vector<Complex> z(a.dim());
    for (size_t j = 0; j < a.dim(); j++) {
        z[j] = a.phases()[j] * b.phases()[ainv[j]];
        z[j] /= std::abs(z[j]);
    }
    return PhasedPermutation(std::move(p), std::move(z));
}

inline PhasedPermutation sample_phased_permutation(size_t N, Rng &rng) {
    if (N == 0) {
        throw DomainError("sample_phased_permutation: N must be >= 1");
    }
    Permutation p = sample_uniform_permutation(N, rng);
    std::vector<Complex> z(N);
    for (auto &v : z) {
        v = unit_phase(uniform01(rng));
    }
    return PhasedPermutation(std::move(p), std::move(z));
}

inline ComplexVector apply(const PhasedPermutation &zp, const ComplexVector &v) {
    if ((size_t)v.size() != zp.dim()) {
        throw DomainError("apply: length mismatch");
    }
    ComplexVector r(v.size());
    for (size_t i = 0; i < zp.dim(); i++) {
        uint32_t j = zp.perm()[i];
        r[j] = zp.phases()[j] * v[(Eigen::Index)i];
    }
    return r;
}

inline ComplexVector apply_adjoint(const PhasedPermutation &zp, const ComplexVector &v) {
    if ((size_t)v.size() != zp.dim()) {
        throw DomainError("apply_adjoint: length mismatch");
    }
    ComplexVector r(v.size());
    for (size_t i = 0; i < zp.dim(); i++) {
        uint32_t j = zp.perm()[i];
        r[(Eigen::Index)i] = std::conj(zp.phases()[j]) * v[j];
    }
    return r;
}

// ---- GF(2^n) -----------------------------------------------------------------

/// Irreducible polynomials over GF(2), bit i = coefficient of x^i, index = degree n.
inline constexpr std::array<uint32_t, 17> kIrreduciblePolys = {
    0,      0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x83,    0x11B,
    0x211,  0x409,  0x805,  0x1009, 0x201B, 0x4021, 0x8003, 0x1100B,
};

class GF2n {
   public:
    explicit GF2n(int n) : n_(n) {
        if (n < 1 || n > 16) {
            throw DomainError("GF(2^n) supported for 1 <= n <= 16");
        }
        poly_ = kIrreduciblePolys[(size_t)n];
    }
    int degree() const {
        return n_;
    }
    uint32_t order() const {
        return 1u << n_;
    }
    uint32_t poly() const {
        return poly_;
    }
    uint32_t add(uint32_t a, uint32_t b) const {
        return a ^ b;
    }
    uint32_t mul(uint32_t a, uint32_t b) const {
        uint32_t r = 0;
        uint32_t top = 1u << n_;
        while (b) {
            if (b & 1) {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if (a & top) {
                a ^= poly_;
            }
        }
        return r;
    }

   private:
    int n_;
    uint32_t poly_;
};

/// Random polynomial of degree independence-1 over GF(2^n); coefficients[0] is the constant term.
struct KWiseFunctionFamily {
    int field_degree = 1;
    int independence = 1;
    std::vector<uint32_t> coefficients;

    KWiseFunctionFamily() = default;
    KWiseFunctionFamily(int n, int kprime, std::vector<uint32_t> key)
        : field_degree(n), independence(kprime), coefficients(std::move(key)) {
        GF2n f(n);
        if (kprime < 1) {
            throw DomainError("independence must be >= 1");
        }
        if ((int)coefficients.size() != kprime) {
            throw DomainError("key length must equal independence");
        }
        for (uint32_t c : coefficients) {
            if (c >= f.order()) {
                throw DomainError("key coefficient outside field");
            }
        }
    }

    static KWiseFunctionFamily sample(int n, int kprime, Rng &rng) {
        GF2n f(n);
        std::vector<uint32_t> key((size_t)kprime);
        for (auto &c : key) {
            c = (uint32_t)uniform_below(rng, f.order());
        }
        return KWiseFunctionFamily(n, kprime, std::move(key));
    }

    /// All keys in lexicographic order.
    static std::vector<KWiseFunctionFamily> enumerate(int n, int kprime) {
        GF2n f(n);
        uint64_t count = ipow_sat(f.order(), (unsigned)kprime);
        if (count > (1ULL << 24)) {
            throw ResourceError("key space too large to enumerate");
        }
        std::vector<KWiseFunctionFamily> out;
        out.reserve(count);
        for (uint64_t idx = 0; idx < count; idx++) {
            std::vector<uint32_t> key((size_t)kprime);
            uint64_t t = idx;
            for (int j = kprime - 1; j >= 0; j--) {
                key[(size_t)j] = (uint32_t)(t % f.order());
                t /= f.order();
            }
            out.emplace_back(n, kprime, std::move(key));
        }
        return out;
    }
};

inline uint32_t kwise_eval(const KWiseFunctionFamily &fam, uint32_t x) {
    GF2n f(fam.field_degree);
    if (x >= f.order()) {
        throw DomainError("kwise_eval: x outside field");
    }
    uint32_t r = 0;
    for (size_t j = fam.coefficients.size(); j-- > 0;) {
        r = f.add(f.mul(r, x), fam.coefficients[j]);
    }
    return r;
}

/// Phases on the N-th roots of unity; N must be a power of two dividing 2^n.
struct KWisePhaseFamily {
    KWiseFunctionFamily base;
    uint32_t modulus = 1;

    KWisePhaseFamily() = default;
    KWisePhaseFamily(KWiseFunctionFamily b, uint32_t N) : base(std::move(b)), modulus(N) {
        if (N == 0 || (N & (N - 1)) != 0 || N > (1u << base.field_degree)) {
            throw DomainError("phase modulus must be a power of two not exceeding the field order");
        }
    }
};

inline Complex kwise_phase(const KWisePhaseFamily &fam, uint32_t i) {
    if (i >= fam.modulus) {
        throw DomainError("kwise_phase: index out of range");
    }
    uint32_t v = kwise_eval(fam.base, i) & (fam.modulus - 1);
    return unit_phase((double)v / (double)fam.modulus);
}

// ---- Feistel stand-in ----------------------------------------------------------

class FeistelNetwork {
   public:
    FeistelNetwork(int domain_bits, std::vector<KWiseFunctionFamily> round_keys)
        : bits_(domain_bits), keys_(std::move(round_keys)) {
        if (domain_bits < 2 || domain_bits % 2 != 0) {
            throw DomainError("Feistel domain bits must be even and >= 2");
        }
        if (keys_.empty()) {
            throw DomainError("Feistel network needs at least one round");
        }
        for (const auto &k : keys_) {
            if (k.field_degree != domain_bits / 2) {
                throw DomainError("round function field must match half width");
            }
        }
    }

    int domain_bits() const {
        return bits_;
    }
    size_t rounds() const {
        return keys_.size();
    }
    uint32_t domain_size() const {
        return 1u << bits_;
    }

    uint32_t forward(uint32_t x) const {
        check(x);
        int h = bits_ / 2;
        uint32_t mask = (1u << h) - 1;
        uint32_t L = x >> h, R = x & mask;
        for (const auto &k : keys_) {
            uint32_t nl = R;
            uint32_t nr = L ^ kwise_eval(k, R);
            L = nl;
            R = nr;
        }
        return (L << h) | R;
    }

    uint32_t inverse(uint32_t y) const {
        check(y);
        int h = bits_ / 2;
        uint32_t mask = (1u << h) - 1;
        uint32_t L = y >> h, R = y & mask;
        for (size_t j = keys_.size(); j-- > 0;) {
            uint32_t pl = R ^ kwise_eval(keys_[j], L);
            uint32_t pr = L;
            L = pl;
            R = pr;
        }
        return (L << h) | R;
    }

    Permutation as_permutation() const {
        std::vector<uint32_t> m(domain_size());
        for (uint32_t x = 0; x < domain_size(); x++) {
            m[x] = forward(x);
        }
        return Permutation(std::move(m));
    }

   private:
    void check(uint32_t x) const {
        if (x >= domain_size()) {
            throw DomainError("Feistel input outside domain");
        }
    }
    int bits_;
    std::vector<KWiseFunctionFamily> keys_;
};

inline uint32_t feistel_permutation(
    int rounds, const std::vector<KWiseFunctionFamily> &round_keys, uint32_t x, int domain_bits) {
    if (rounds < 1 || (size_t)rounds > round_keys.size()) {
        throw DomainError("rounds must be in [1, number of round keys]");
    }
    std::vector<KWiseFunctionFamily> used(round_keys.begin(), round_keys.begin() + rounds);
    return FeistelNetwork(domain_bits, std::move(used)).forward(x);
}

// ---- k-wise l1 tester --------------------------------------------------------

namespace detail {
inline void check_tuple(size_t N, const std::vector<uint32_t> &tuple) {
    if (tuple.empty()) {
        throw DomainError("tuple must be nonempty");
    }
    for (size_t a = 0; a < tuple.size(); a++) {
        if (tuple[a] >= N) {
            throw DomainError("tuple entry out of range");
        }
        for (size_t b = 0; b < a; b++) {
            if (tuple[a] == tuple[b]) {
                throw DomainError("tuple entries must be distinct");
            }
        }
    }
}

inline uint64_t falling(uint64_t n, size_t k) {
    uint64_t r = 1;
    for (size_t i = 0; i < k; i++) {
        r *= (n - i);
    }
    return r;
}

/// l1 distance between the histogram `counts` (total `total`) over image tuples and
/// the uniform law on injective tuples. Integer numerators keep exact cases exact.
inline double l1_against_injective(
    const std::map<std::vector<uint32_t>, uint64_t> &counts, uint64_t total, size_t N, size_t k) {
    uint64_t ff = falling(N, k);
    long double acc = 0;
    uint64_t seen_injective = 0;
    for (const auto &[tup, c] : counts) {
        bool inj = true;
        for (size_t a = 0; a < tup.size() && inj; a++) {
            for (size_t b = 0; b < a; b++) {
                if (tup[a] == tup[b]) {
                    inj = false;
                    break;
                }
            }
        }
        if (inj) {
            seen_injective++;
            long double num = (long double)c * ff - (long double)total;
            acc += std::abs(num) / ((long double)total * ff);
        } else {
            acc += (long double)c / total;
        }
    }
    acc += (long double)(ff - seen_injective) / ff;
    return (double)acc;
}
}  // namespace detail

/// Exhaustive: each member of `family` carries equal weight.
inline double kwise_l1_distance(const std::vector<Permutation> &family, const std::vector<uint32_t> &tuple) {
    if (family.empty()) {
        throw DomainError("empty family");
    }
    size_t N = family[0].size();
    if (N > 64) {
        throw ResourceError("exhaustive l1 tester limited to N <= 64");
    }
    detail::check_tuple(N, tuple);
    std::map<std::vector<uint32_t>, uint64_t> counts;
    std::vector<uint32_t> img(tuple.size());
    for (const auto &p : family) {
        require(p.size() == N, "family members must share N");
        for (size_t a = 0; a < tuple.size(); a++) {
            img[a] = p[tuple[a]];
        }
        counts[img]++;
    }
    return detail::l1_against_injective(counts, family.size(), N, tuple.size());
}

/// Sampled: n_keys independent draws from `sampler`.
inline double kwise_l1_distance(
    const std::function<Permutation(Rng &)> &sampler, const std::vector<uint32_t> &tuple, uint64_t n_keys, Rng &rng) {
    if (n_keys == 0) {
        throw DomainError("n_keys must be >= 1");
    }
    std::map<std::vector<uint32_t>, uint64_t> counts;
    std::vector<uint32_t> img(tuple.size());
    size_t N = 0;
    for (uint64_t s = 0; s < n_keys; s++) {
        Permutation p = sampler(rng);
        if (s == 0) {
            N = p.size();
            detail::check_tuple(N, tuple);
        }
        require(p.size() == N, "sampler returned inconsistent sizes");
        for (size_t a = 0; a < tuple.size(); a++) {
            img[a] = p[tuple[a]];
        }
        counts[img]++;
    }
    return detail::l1_against_injective(counts, n_keys, N, tuple.size());
}

struct KWiseL1Report {
    std::vector<std::vector<uint32_t>> tuples;
    std::vector<double> per_tuple;
    double max = 0;
    double mean = 0;
};

/// Every ordered tuple of k distinct points.
inline KWiseL1Report kwise_l1_report(const std::vector<Permutation> &family, size_t k) {
    if (family.empty()) {
        throw DomainError("empty family");
    }
    size_t N = family[0].size();
    if (k == 0 || k > N) {
        throw DomainError("k must be in [1, N]");
    }
    if (detail::falling(N, k) > 100000) {
        throw ResourceError("too many tuples for a full report");
    }
    KWiseL1Report rep;
    std::vector<uint32_t> t(k, 0);
    std::function<void(size_t)> rec = [&](size_t pos) {
        if (pos == k) {
            rep.tuples.push_back(t);
            rep.per_tuple.push_back(kwise_l1_distance(family, t));
            return;
        }
        for (uint32_t v = 0; v < N; v++) {
            if (std::find(t.begin(), t.begin() + (long)pos, v) != t.begin() + (long)pos) {
                continue;
            }
            t[pos] = v;
            rec(pos + 1);
        }
    };
    rec(0);
    double s = 0;
    for (double v : rep.per_tuple) {
        rep.max = std::max(rep.max, v);
        s += v;
    }
    rep.mean = s / (double)rep.per_tuple.size();
    return rep;
}

/// All N! permutations in lexicographic order (N <= 8).
inline std::vector<Permutation> all_permutations(size_t N) {
    if (N > 8) {
        throw ResourceError("all_permutations limited to N <= 8");
    }
    std::vector<uint32_t> m(N);
    std::iota(m.begin(), m.end(), 0u);
    std::vector<Permutation> out;
    do {
        out.emplace_back(m);
    } while (std::next_permutation(m.begin(), m.end()));
    return out;
}

}  // namespace haarforge

#endif
