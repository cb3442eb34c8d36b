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

#ifndef HAARFORGE_FREE_WORDS_HPP
#define HAARFORGE_FREE_WORDS_HPP

#include <unordered_map>
#include <unordered_set>

#include "haarforge/perm_core.hpp"

namespace haarforge {

inline constexpr uint64_t kWordBudget = 10000000;

/// Reduced word over {Z_a, Z_a^dagger}, a >= 1. Letter +a is Z_a, -a is Z_a^dagger.
/// The leftmost letter is the leftmost matrix factor.
class FreeWord {
   public:
    struct Letter {
        int generator;
        int sign;
    };

    FreeWord() = default;

    explicit FreeWord(std::vector<int32_t> codes) : codes_(std::move(codes)) {
        for (size_t i = 0; i < codes_.size(); i++) {
            if (codes_[i] == 0) {
                throw DomainError("FreeWord: generator index must be >= 1");
            }
            if (i > 0 && codes_[i] == -codes_[i - 1]) {
                throw DomainError("FreeWord: word is not reduced");
            }
        }
    }

    static FreeWord from_letters(const std::vector<Letter> &letters) {
        std::vector<int32_t> c;
        for (const auto &l : letters) {
            if (l.sign != 1 && l.sign != -1) {
                throw DomainError("FreeWord: sign must be +1 or -1");
            }
            c.push_back(l.generator * l.sign);
        }
        return FreeWord(std::move(c));
    }

    /// Parses "2,1" or "2,-1"; "" is the empty word.
    static FreeWord parse(const std::string &s) {
        std::vector<int32_t> c;
        std::string tok;
        for (char ch : s + ",") {
            if (ch == ',' || ch == ' ') {
                if (!tok.empty()) {
                    c.push_back((int32_t)std::stol(tok));
                    tok.clear();
                }
            } else {
                tok += ch;
            }
        }
        return FreeWord(std::move(c));
    }

    const std::vector<int32_t> &codes() const {
        return codes_;
    }
    size_t length() const {
        return codes_.size();
    }
    bool empty() const {
        return codes_.empty();
    }
    std::vector<Letter> letters() const {
        std::vector<Letter> out;
        for (int32_t c : codes_) {
            out.push_back({std::abs(c), c > 0 ? 1 : -1});
        }
        return out;
    }
    int max_generator() const {
        int g = 0;
        for (int32_t c : codes_) {
            g = std::max(g, std::abs(c));
        }
        return g;
    }

    FreeWord inverse() const {
        std::vector<int32_t> c(codes_.rbegin(), codes_.rend());
        for (auto &x : c) {
            x = -x;
        }
        return FreeWord(std::move(c));
    }

    std::string str() const {
        if (codes_.empty()) {
            return "I";
        }
        std::string s;
        for (int32_t c : codes_) {
            s += "Z" + std::to_string(std::abs(c)) + (c < 0 ? "'" : "");
        }
        return s;
    }

    bool operator==(const FreeWord &o) const = default;
    auto operator<=>(const FreeWord &o) const = default;

   private:
    std::vector<int32_t> codes_;
};

/// Free-group product with cancellation at the junction.
inline FreeWord reduce_concat(const FreeWord &a, const FreeWord &b) {
    std::vector<int32_t> c = a.codes();
    for (int32_t x : b.codes()) {
        if (!c.empty() && c.back() == -x) {
            c.pop_back();
        } else {
            c.push_back(x);
        }
    }
    return FreeWord(std::move(c));
}

struct FreeWordHash {
    size_t operator()(const FreeWord &w) const {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (int32_t c : w.codes()) {
            h ^= (uint32_t)c;
            h *= 0x100000001b3ULL;
        }
        return (size_t)splitmix64(h);
    }
};

struct WordCoefficients {
    Complex identity_coeff = 1.0;
    std::unordered_map<FreeWord, Complex, FreeWordHash> weights;
    int truncation_degree = 0;
    // Generators used are first_generator .. first_generator + generator_count - 1.
    int first_generator = 1;
    int generator_count = 0;
};

/// Number of reduced words of length <= d over m generators and inverses.
inline uint64_t reduced_word_count(int m, int d) {
    uint64_t total = 1;
    uint64_t layer = 2ULL * (uint64_t)m;
    for (int L = 1; L <= d; L++) {
        total += layer;
        if (total > (1ULL << 62)) {
            return UINT64_MAX;
        }
        layer *= (2ULL * (uint64_t)m - 1);
        if (m == 0) break;
    }
    return total;
}

/// Tail of the exponential series, sum_{p > d} x^p/p! with x = theta sqrt(2m) >= ||theta A_m||.
inline double taylor_tail_bound(int m, double theta, int d) {
    double x = std::abs(theta) * std::sqrt(2.0 * m);
    double term = 1.0;
    for (int p = 1; p <= d + 1; p++) {
        term *= x / p;
    }
    double s = 0;
    for (int p = d + 1; p < d + 400; p++) {
        s += term;
        term *= x / (p + 1);
        if (term < 1e-300) break;
    }
    return s;
}

/// Degree-<= d Taylor polynomial of exp(i theta sum_a (Z_a + Z_a^dagger)/sqrt(2m)), as a
/// sum over reduced words. Generators are numbered first_generator .. first_generator+m-1.
inline WordCoefficients expand_exponential(int m, double theta, int d, int first_generator = 1) {
    if (m < 1 || d < 0 || first_generator < 1) {
        throw DomainError("expand_exponential: need m >= 1, d >= 0, first_generator >= 1");
    }
    if (reduced_word_count(m, d) > kWordBudget) {
        throw ResourceError(
            "expand_exponential: word budget exceeded for (m=" + std::to_string(m) + ", d=" + std::to_string(d) + ")");
    }
    using Map = std::unordered_map<FreeWord, Complex, FreeWordHash>;
    std::vector<int32_t> alphabet;
    for (int a = 0; a < m; a++) {
        alphabet.push_back(first_generator + a);
        alphabet.push_back(-(first_generator + a));
    }
    Complex alpha(0.0, theta / std::sqrt(2.0 * m));

    Map total;
    Map cur;
    cur.emplace(FreeWord(), Complex(1.0));
    total.emplace(FreeWord(), Complex(1.0));
    for (int p = 1; p <= d; p++) {
        Map next;
        next.reserve(cur.size() * 2);
        Complex scale = alpha / (double)p;
        for (const auto &[w, c] : cur) {
            const auto &codes = w.codes();
            for (int32_t x : alphabet) {
                std::vector<int32_t> nc;
                if (!codes.empty() && codes.back() == -x) {
                    nc.assign(codes.begin(), codes.end() - 1);
                } else {
                    nc.reserve(codes.size() + 1);
                    nc = codes;
                    nc.push_back(x);
                }
                next[FreeWord(std::move(nc))] += c * scale;
            }
        }
        for (const auto &[w, c] : next) {
            total[w] += c;
        }
        cur = std::move(next);
    }

    WordCoefficients wc;
    wc.truncation_degree = d;
    wc.first_generator = first_generator;
    wc.generator_count = m;
    for (auto &[w, c] : total) {
        if (w.empty()) {
            wc.identity_coeff = c;
        } else {
            wc.weights.emplace(w, c);
        }
    }
    return wc;
}

struct WeightStats {
    double sum_sq = 0;
    double max_abs = 0;
    uint64_t n_words = 0;
};

/// Statistics over the non-identity words.
inline WeightStats weight_stats(const WordCoefficients &wc) {
    WeightStats s;
    KahanSum<double> acc;
    for (const auto &[w, c] : wc.weights) {
        double a = std::abs(c);
        acc.add(a * a);
        s.max_abs = std::max(s.max_abs, a);
    }
    s.sum_sq = acc.value();
    s.n_words = wc.weights.size();
    return s;
}

/// Coefficients of the product of blocks with disjoint alphabets.
inline WordCoefficients product_words(const std::vector<WordCoefficients> &blocks) {
    if (blocks.empty()) {
        throw DomainError("product_words: need at least one block");
    }
    for (size_t i = 0; i < blocks.size(); i++) {
        for (size_t j = 0; j < i; j++) {
            int a0 = blocks[i].first_generator, a1 = a0 + blocks[i].generator_count;
            int b0 = blocks[j].first_generator, b1 = b0 + blocks[j].generator_count;
            if (a0 < b1 && b0 < a1) {
                throw DomainError("product_words: blocks share generators");
            }
        }
    }
    if (blocks.size() == 1) {
        return blocks[0];
    }
    uint64_t count = 1;
    for (const auto &b : blocks) {
        count *= (uint64_t)b.weights.size() + 1;
        if (count > kWordBudget) {
            throw ResourceError("product_words: word budget exceeded");
        }
    }

    using Entry = std::pair<std::vector<int32_t>, Complex>;
    std::vector<Entry> acc{{{}, Complex(1.0)}};
    for (const auto &b : blocks) {
        std::vector<Entry> terms{{{}, b.identity_coeff}};
        for (const auto &[w, c] : b.weights) {
            terms.emplace_back(w.codes(), c);
        }
        std::vector<Entry> next;
        next.reserve(acc.size() * terms.size());
        for (const auto &[aw, ac] : acc) {
            for (const auto &[tw, tc] : terms) {
                std::vector<int32_t> w = aw;
                w.insert(w.end(), tw.begin(), tw.end());
                next.emplace_back(std::move(w), ac * tc);
            }
        }
        acc = std::move(next);
    }

    WordCoefficients out;
    out.truncation_degree = 0;
    int lo = INT32_MAX, hi = 0;
    for (const auto &b : blocks) {
        out.truncation_degree += b.truncation_degree;
        lo = std::min(lo, b.first_generator);
        hi = std::max(hi, b.first_generator + b.generator_count);
    }
    out.first_generator = lo;
    out.generator_count = hi - lo;
    out.identity_coeff = 0;
    out.weights.reserve(acc.size());
    for (auto &[w, c] : acc) {
        if (w.empty()) {
            out.identity_coeff = c;
            continue;
        }
        auto [it, inserted] = out.weights.emplace(FreeWord(std::move(w)), c);
        if (!inserted) {
            throw NumericError("product_words: two multi-indices produced the same word " + it->first.str());
        }
    }
    return out;
}

namespace detail {
inline void check_word_range(const FreeWord &w, size_t n_generators) {
    if ((size_t)w.max_generator() > n_generators) {
        throw DomainError("word uses generator " + std::to_string(w.max_generator()) + " but only " +
                          std::to_string(n_generators) + " supplied");
    }
}
}  // namespace detail

/// Word as a phased permutation (product of 1-sparse unitaries is 1-sparse).
inline PhasedPermutation realize_word_phased(const FreeWord &w, const std::vector<PhasedPermutation> &zs) {
    detail::check_word_range(w, zs.size());
    if (zs.empty()) {
        throw DomainError("realize_word: no generators supplied");
    }
    size_t N = zs[0].dim();
    PhasedPermutation acc = PhasedPermutation::identity(N);
    for (int32_t c : w.codes()) {
        const auto &z = zs[(size_t)std::abs(c) - 1];
        require(z.dim() == N, "realize_word: dimension mismatch");
        acc = compose(acc, c > 0 ? z : z.adjoint());
    }
    return acc;
}

inline DenseOperator realize_word(const FreeWord &w, const std::vector<PhasedPermutation> &zs) {
    detail::check_word_range(w, zs.size());
    if (zs.empty()) {
        throw DomainError("realize_word: no generators supplied");
    }
    auto N = (Eigen::Index)zs[0].dim();
    DenseOperator acc = DenseOperator::Identity(N, N);
    for (int32_t c : w.codes()) {
        const auto &z = zs[(size_t)std::abs(c) - 1];
        require((Eigen::Index)z.dim() == N, "realize_word: dimension mismatch");
        DenseOperator f = z.dense();
        if (c < 0) f = f.adjoint().eval();
        acc = (acc * f).eval();
    }
    return acc;
}

/// v I + sum_i w_i W_i realized densely. zs[a-1] realizes generator a.
inline DenseOperator realize_expansion(const WordCoefficients &wc, const std::vector<PhasedPermutation> &zs) {
    if (zs.empty()) {
        throw DomainError("realize_expansion: no generators supplied");
    }
    size_t N = zs[0].dim();
    std::vector<Permutation> inv;
    for (const auto &z : zs) {
        require(z.dim() == N, "realize_expansion: dimension mismatch");
        inv.push_back(z.perm().inverse());
    }
    DenseOperator out = DenseOperator::Identity((Eigen::Index)N, (Eigen::Index)N) * wc.identity_coeff;
    for (const auto &[w, c] : wc.weights) {
        detail::check_word_range(w, zs.size());
        const auto &codes = w.codes();
        for (size_t i = 0; i < N; i++) {
            uint32_t idx = (uint32_t)i;
            Complex ph = c;
            for (size_t t = codes.size(); t-- > 0;) {
                size_t g = (size_t)std::abs(codes[t]) - 1;
                if (codes[t] > 0) {
                    idx = zs[g].perm()[idx];
                    ph *= zs[g].phases()[idx];
                } else {
                    ph *= std::conj(zs[g].phases()[idx]);
                    idx = inv[g][idx];
                }
            }
            out(idx, (Eigen::Index)i) += ph;
        }
    }
    return out;
}

}  // namespace haarforge

#endif
