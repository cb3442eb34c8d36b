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

#ifndef HAARFORGE_PARTITION_ALGEBRA_HPP
#define HAARFORGE_PARTITION_ALGEBRA_HPP

#include <map>
#include <numeric>
#include <unordered_map>

#include "haarforge/core.hpp"

namespace haarforge {

using IntMatrix = Eigen::Matrix<int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Integer Laurent polynomial in the dimension symbol N.
class NPowerCoeff {
   public:
    NPowerCoeff() = default;

    static NPowerCoeff monomial(int exponent, int64_t coeff = 1) {
        NPowerCoeff c;
        if (coeff != 0) {
            c.terms_[exponent] = coeff;
        }
        return c;
    }

    const std::map<int, int64_t> &terms() const {
        return terms_;
    }
    /// Optional pole data (location, multiplicity) for rational extensions.
    std::vector<std::pair<int64_t, int>> poles;

    NPowerCoeff operator+(const NPowerCoeff &o) const {
        NPowerCoeff r = *this;
        for (const auto &[e, c] : o.terms_) {
            r.terms_[e] += c;
            if (r.terms_[e] == 0) r.terms_.erase(e);
        }
        return r;
    }
    NPowerCoeff operator*(const NPowerCoeff &o) const {
        NPowerCoeff r;
        for (const auto &[e1, c1] : terms_) {
            for (const auto &[e2, c2] : o.terms_) {
                r.terms_[e1 + e2] += c1 * c2;
            }
        }
        std::erase_if(r.terms_, [](const auto &kv) { return kv.second == 0; });
        return r;
    }
    bool operator==(const NPowerCoeff &o) const {
        return terms_ == o.terms_;
    }

    /// Exact value at integer N when all exponents are nonnegative.
    int64_t evaluate_int(int64_t N) const {
        int64_t s = 0;
        for (const auto &[e, c] : terms_) {
            if (e < 0) {
                throw DomainError("evaluate_int: negative exponent");
            }
            s += c * (int64_t)ipow((uint64_t)N, (unsigned)e);
        }
        return s;
    }
    double evaluate(double N) const {
        double s = 0;
        for (const auto &[e, c] : terms_) {
            s += (double)c * std::pow(N, e);
        }
        return s;
    }

   private:
    std::map<int, int64_t> terms_;
};

/// Set partition of {0..n-1} as a restricted-growth string.
class SetPartition {
   public:
    SetPartition() = default;

    /// Accepts any labeling; canonicalizes to restricted-growth form.
    explicit SetPartition(const std::vector<int> &labels) {
        std::map<int, uint8_t> relabel;
        rgs_.reserve(labels.size());
        for (int l : labels) {
            auto it = relabel.find(l);
            if (it == relabel.end()) {
                it = relabel.emplace(l, (uint8_t)relabel.size()).first;
            }
            rgs_.push_back(it->second);
        }
        nblocks_ = (int)relabel.size();
    }

    static SetPartition from_rgs(std::vector<uint8_t> rgs) {
        SetPartition p;
        int mx = -1;
        for (uint8_t v : rgs) {
            if ((int)v > mx + 1) {
                throw DomainError("not a restricted-growth string");
            }
            mx = std::max(mx, (int)v);
        }
        p.rgs_ = std::move(rgs);
        p.nblocks_ = mx + 1;
        return p;
    }

    /// Blocks given as 0-based point lists.
    static SetPartition from_blocks0(size_t n, const std::vector<std::vector<int>> &blocks) {
        std::vector<int> lab(n, -1);
        for (size_t b = 0; b < blocks.size(); b++) {
            if (blocks[b].empty()) {
                throw DomainError("empty block");
            }
            for (int x : blocks[b]) {
                if (x < 0 || (size_t)x >= n || lab[(size_t)x] != -1) {
                    throw DomainError("blocks do not partition the ground set");
                }
                lab[(size_t)x] = (int)b;
            }
        }
        for (int v : lab) {
            if (v < 0) {
                throw DomainError("blocks do not cover the ground set");
            }
        }
        return SetPartition(lab);
    }

    size_t size() const {
        return rgs_.size();
    }
    int num_blocks() const {
        return nblocks_;
    }
    const std::vector<uint8_t> &rgs() const {
        return rgs_;
    }
    uint8_t block_of(size_t i) const {
        return rgs_[i];
    }
    bool same_block(size_t i, size_t j) const {
        return rgs_[i] == rgs_[j];
    }

    std::vector<std::vector<int>> blocks() const {
        std::vector<std::vector<int>> b((size_t)nblocks_);
        for (size_t i = 0; i < rgs_.size(); i++) {
            b[rgs_[i]].push_back((int)i);
        }
        return b;
    }

    bool operator==(const SetPartition &o) const = default;
    bool operator<(const SetPartition &o) const {
        return rgs_ < o.rgs_;
    }

   private:
    std::vector<uint8_t> rgs_;
    int nblocks_ = 0;
};

struct SetPartitionHash {
    size_t operator()(const SetPartition &p) const {
        uint64_t h = 0x84222325cbf29ce4ULL;
        for (uint8_t v : p.rgs()) {
            h = (h ^ v) * 0x100000001b3ULL;
        }
        return (size_t)h;
    }
};

/// p1 <= p2: each block of p1 lies inside a block of p2.
inline bool refines(const SetPartition &p1, const SetPartition &p2) {
    if (p1.size() != p2.size()) {
        throw DomainError("refines: ground sets differ");
    }
    std::vector<int> target((size_t)p1.num_blocks(), -1);
    for (size_t i = 0; i < p1.size(); i++) {
        int &t = target[p1.block_of(i)];
        if (t == -1) {
            t = p2.block_of(i);
        } else if (t != p2.block_of(i)) {
            return false;
        }
    }
    return true;
}

namespace detail {
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[(size_t)x] != x) {
            parent[(size_t)x] = parent[(size_t)parent[(size_t)x]];
            x = parent[(size_t)x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[(size_t)std::max(a, b)] = std::min(a, b);
    }
};
}  // namespace detail

/// Finest common coarsening.
inline SetPartition join(const SetPartition &a, const SetPartition &b) {
    require(a.size() == b.size(), "join: ground sets differ");
    detail::UnionFind uf(a.size());
    std::vector<int> fa((size_t)a.num_blocks(), -1), fb((size_t)b.num_blocks(), -1);
    for (size_t i = 0; i < a.size(); i++) {
        int &x = fa[a.block_of(i)];
        if (x < 0) x = (int)i; else uf.unite(x, (int)i);
        int &y = fb[b.block_of(i)];
        if (y < 0) y = (int)i; else uf.unite(y, (int)i);
    }
    std::vector<int> lab(a.size());
    for (size_t i = 0; i < a.size(); i++) lab[i] = uf.find((int)i);
    return SetPartition(lab);
}

/// Kernel partition of a label tuple: i ~ j iff labels agree.
template <typename T>
inline SetPartition kernel_partition(const std::vector<T> &labels) {
    std::vector<int> lab(labels.begin(), labels.end());
    return SetPartition(lab);
}

inline uint64_t bell_number(int n) {
    std::vector<uint64_t> row{1};
    for (int i = 0; i < n; i++) {
        std::vector<uint64_t> next{row.back()};
        for (uint64_t v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

/// All set partitions of n points in lexicographic restricted-growth order.
inline std::vector<SetPartition> enumerate_partitions(int n_points) {
    if (n_points < 0) {
        throw DomainError("enumerate_partitions: n must be >= 0");
    }
    if (n_points > 12) {
        throw ResourceError("enumerate_partitions: n_points capped at 12");
    }
    std::vector<SetPartition> out;
    out.reserve(bell_number(n_points));
    std::vector<uint8_t> r((size_t)n_points, 0);
    std::function<void(int, int)> rec = [&](int pos, int mx) {
        if (pos == n_points) {
            out.push_back(SetPartition::from_rgs(r));
            return;
        }
        for (int v = 0; v <= mx + 1; v++) {
            r[(size_t)pos] = (uint8_t)v;
            rec(pos + 1, std::max(mx, v));
        }
    };
    if (n_points == 0) {
        out.push_back(SetPartition::from_rgs({}));
        return out;
    }
    r[0] = 0;
    rec(1, 0);
    return out;
}

/// Diagram on 2k nodes: 0..k-1 top (ket), k..2k-1 bottom (bra).
class SetPartitionDiagram {
   public:
    SetPartitionDiagram() = default;
    SetPartitionDiagram(int k, SetPartition p) : k_(k), p_(std::move(p)) {
        if (k < 1 || p_.size() != (size_t)(2 * k)) {
            throw DomainError("diagram must partition 2k points");
        }
    }

    /// Blocks as 1-based node lists (1..k top, k+1..2k bottom).
    static SetPartitionDiagram from_blocks(int k, const std::vector<std::vector<int>> &blocks) {
        std::vector<std::vector<int>> b0 = blocks;
        for (auto &b : b0) {
            for (int &x : b) x -= 1;
        }
        return SetPartitionDiagram(k, SetPartition::from_blocks0((size_t)(2 * k), b0));
    }

    static SetPartitionDiagram identity(int k) {
        std::vector<int> lab((size_t)(2 * k));
        for (int i = 0; i < k; i++) lab[(size_t)i] = lab[(size_t)(i + k)] = i;
        return SetPartitionDiagram(k, SetPartition(lab));
    }

    /// Diagram of the operator P_sigma, P_sigma |x_1..x_k> = |x_{sigma^-1(1)}..>.
    /// Top node sigma(a) is joined to bottom node a.
    static SetPartitionDiagram from_permutation(const std::vector<int> &sigma) {
        int k = (int)sigma.size();
        std::vector<int> lab((size_t)(2 * k));
        for (int a = 0; a < k; a++) {
            lab[(size_t)sigma[(size_t)a]] = a;
            lab[(size_t)(k + a)] = a;
        }
        return SetPartitionDiagram(k, SetPartition(lab));
    }

    int k() const {
        return k_;
    }
    const SetPartition &partition() const {
        return p_;
    }
    int num_blocks() const {
        return p_.num_blocks();
    }
    std::vector<std::vector<int>> blocks() const {
        auto b = p_.blocks();
        for (auto &x : b) {
            for (int &v : x) v += 1;
        }
        return b;
    }
    json to_json() const {
        return json{{"k", k_}, {"blocks", blocks()}};
    }
    std::string str() const {
        std::string s = "{";
        auto b = blocks();
        for (size_t i = 0; i < b.size(); i++) {
            s += (i ? ",(" : "(");
            for (size_t j = 0; j < b[i].size(); j++) {
                s += (j ? "," : "") + std::to_string(b[i][j]);
            }
            s += ")";
        }
        return s + "}";
    }

    bool operator==(const SetPartitionDiagram &o) const = default;
    bool operator<(const SetPartitionDiagram &o) const {
        return p_ < o.p_;
    }

   private:
    int k_ = 1;
    SetPartition p_;
};

inline std::vector<SetPartitionDiagram> enumerate_diagrams(int k) {
    std::vector<SetPartitionDiagram> out;
    for (auto &p : enumerate_partitions(2 * k)) {
        out.emplace_back(k, std::move(p));
    }
    return out;
}

inline bool refines(const SetPartitionDiagram &p1, const SetPartitionDiagram &p2) {
    if (p1.k() != p2.k()) {
        throw DomainError("refines: ground sets differ");
    }
    return refines(p1.partition(), p2.partition());
}

struct DiagramProduct {
    SetPartitionDiagram diagram;
    int d = 0;
};

/// p2 * p1: p1 below p2, the bottom row of p2 glued to the top row of p1.
/// d counts components confined to the glued row.
inline DiagramProduct multiply(const SetPartitionDiagram &p2, const SetPartitionDiagram &p1) {
    if (p1.k() != p2.k()) {
        throw DomainError("multiply: k mismatch");
    }
    int k = p1.k();
    // Rows: A = 0..k-1 (top of p2), B = k..2k-1 (glued), C = 2k..3k-1 (bottom of p1).
    detail::UnionFind uf((size_t)(3 * k));
    auto glue = [&](const SetPartition &p, int top_off, int bot_off) {
        std::vector<int> first((size_t)p.num_blocks(), -1);
        for (int i = 0; i < 2 * k; i++) {
            int node = i < k ? top_off + i : bot_off + (i - k);
            int &f = first[p.block_of((size_t)i)];
            if (f < 0) f = node; else uf.unite(f, node);
        }
    };
    glue(p2.partition(), 0, k);
    glue(p1.partition(), k, 2 * k);
    std::vector<char> has_leg((size_t)(3 * k), 0);
    for (int i = 0; i < k; i++) {
        has_leg[(size_t)uf.find(i)] = 1;
        has_leg[(size_t)uf.find(2 * k + i)] = 1;
    }
    int d = 0;
    for (int i = k; i < 2 * k; i++) {
        if (uf.find(i) == i && !has_leg[(size_t)i]) d++;
    }
    std::vector<int> lab((size_t)(2 * k));
    for (int i = 0; i < k; i++) {
        lab[(size_t)i] = uf.find(i);
        lab[(size_t)(k + i)] = uf.find(2 * k + i);
    }
    return {SetPartitionDiagram(k, SetPartition(lab)), d};
}

inline SetPartitionDiagram involution(const SetPartitionDiagram &p) {
    int k = p.k();
    std::vector<int> lab((size_t)(2 * k));
    for (int i = 0; i < k; i++) {
        lab[(size_t)i] = p.partition().block_of((size_t)(i + k));
        lab[(size_t)(i + k)] = p.partition().block_of((size_t)i);
    }
    return SetPartitionDiagram(k, SetPartition(lab));
}

inline int propagating_count(const SetPartitionDiagram &p) {
    int k = p.k();
    std::vector<int> mask((size_t)p.num_blocks(), 0);
    for (int i = 0; i < 2 * k; i++) {
        mask[p.partition().block_of((size_t)i)] |= (i < k ? 1 : 2);
    }
    return (int)std::count(mask.begin(), mask.end(), 3);
}

inline bool ideal_member(const SetPartitionDiagram &p, int m) {
    return propagating_count(p) <= m;
}

/// Number of blocks of the join; tr(O_p1^dagger O_p2) = N^c.
inline int inner_product_power(const SetPartitionDiagram &p1, const SetPartitionDiagram &p2) {
    if (p1.k() != p2.k()) {
        throw DomainError("inner_product_power: k mismatch");
    }
    return join(p1.partition(), p2.partition()).num_blocks();
}

inline NPowerCoeff inner_product_coeff(const SetPartitionDiagram &p1, const SetPartitionDiagram &p2) {
    return NPowerCoeff::monomial(inner_product_power(p1, p2));
}

/// |M'_Pi| = N (N-1) ... (N - |Pi| + 1).
inline int64_t distinct_index_count(int num_blocks, int64_t N) {
    int64_t r = 1;
    for (int i = 0; i < num_blocks; i++) r *= (N - i);
    return std::max<int64_t>(r, 0);
}

namespace detail {

inline void check_dense_cap(int k, int N) {
    if (N < 1 || k < 1) {
        throw DomainError("dense realization needs N >= 1, k >= 1");
    }
    if (ipow_sat((uint64_t)N, (unsigned)k) > kDenseSideCap) {
        throw ResourceError("dense realization capped at N^k <= 4096");
    }
}

/// Digits of x in base N, most significant first, written into out[offset..offset+len).
inline void decode_digits(uint64_t x, int N, int len, std::vector<int> &out, int offset) {
    for (int i = len - 1; i >= 0; i--) {
        out[(size_t)(offset + i)] = (int)(x % (uint64_t)N);
        x /= (uint64_t)N;
    }
}

/// 0 if labels violate p; 1 if labels respect p (same block => same label);
/// 2 if additionally distinct blocks carry distinct labels.
inline int label_match(const SetPartition &p, const std::vector<int> &labels, std::vector<int> &scratch) {
    std::fill(scratch.begin(), scratch.end(), -1);
    for (size_t i = 0; i < labels.size(); i++) {
        int &s = scratch[p.block_of(i)];
        if (s < 0) s = labels[i];
        else if (s != labels[i]) return 0;
    }
    for (size_t a = 0; a < (size_t)p.num_blocks(); a++) {
        for (size_t b = 0; b < a; b++) {
            if (scratch[a] == scratch[b]) return 1;
        }
    }
    return 2;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> realize(const SetPartitionDiagram &p, int N, bool distinct) {
    int k = p.k();
    check_dense_cap(k, N);
    auto D = (Eigen::Index)ipow((uint64_t)N, (unsigned)k);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(D, D);
    std::vector<int> labels((size_t)(2 * k));
    std::vector<int> scratch((size_t)p.num_blocks());
    for (Eigen::Index r = 0; r < D; r++) {
        decode_digits((uint64_t)r, N, k, labels, 0);
        for (Eigen::Index c = 0; c < D; c++) {
            decode_digits((uint64_t)c, N, k, labels, k);
            int t = label_match(p.partition(), labels, scratch);
            if (t == 2 || (t == 1 && !distinct)) m(r, c) = Scalar(1);
        }
    }
    return m;
}

}  // namespace detail

/// O_Pi = sum over index tuples constant on blocks of Pi.
inline DenseOperator dense_realize(const SetPartitionDiagram &p, int N) {
    return detail::realize<Complex>(p, N, false);
}
inline IntMatrix dense_realize_int(const SetPartitionDiagram &p, int N) {
    return detail::realize<int64_t>(p, N, false);
}

/// O'_Pi: as O_Pi but distinct blocks carry distinct indices.
inline DenseOperator dense_realize_distinct(const SetPartitionDiagram &p, int N) {
    return detail::realize<Complex>(p, N, true);
}
inline IntMatrix dense_realize_distinct_int(const SetPartitionDiagram &p, int N) {
    return detail::realize<int64_t>(p, N, true);
}

/// Row-sparse integer matrix.
struct SparseIntMatrix {
    size_t n = 0;
    std::vector<std::vector<std::pair<uint32_t, int64_t>>> rows;

    int64_t at(size_t r, size_t c) const {
        for (const auto &[j, v] : rows[r]) {
            if (j == c) return v;
        }
        return 0;
    }
    IntMatrix dense() const {
        IntMatrix m = IntMatrix::Zero((Eigen::Index)n, (Eigen::Index)n);
        for (size_t r = 0; r < n; r++) {
            for (const auto &[c, v] : rows[r]) m((Eigen::Index)r, c) = v;
        }
        return m;
    }
    size_t nonzeros() const {
        size_t s = 0;
        for (const auto &r : rows) s += r.size();
        return s;
    }
};

inline SparseIntMatrix sparse_multiply(const SparseIntMatrix &a, const SparseIntMatrix &b) {
    require(a.n == b.n, "sparse_multiply: size mismatch");
    SparseIntMatrix out;
    out.n = a.n;
    out.rows.resize(a.n);
    std::vector<int64_t> acc(a.n, 0);
    std::vector<uint32_t> touched;
    for (size_t r = 0; r < a.n; r++) {
        touched.clear();
        for (const auto &[l, v] : a.rows[r]) {
            for (const auto &[c, w] : b.rows[l]) {
                if (acc[c] == 0) touched.push_back(c);
                acc[c] += v * w;
                if (acc[c] == 0) acc[c] = 0;
            }
        }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (uint32_t c : touched) {
            if (acc[c] != 0) out.rows[r].emplace_back(c, acc[c]);
            acc[c] = 0;
        }
    }
    return out;
}

struct MobiusData {
    // Linear extension: finest partitions first (reverse restricted-growth order).
    std::vector<SetPartition> order;
    SparseIntMatrix K;
    SparseIntMatrix K_inv;
};

/// K[P][P'] = 1 iff P <= P'. Unit upper triangular in `order`; K_inv by back substitution.
/// The argument is the number of points 2k.
inline MobiusData mobius_matrices_points(int n_points) {
    if (n_points > 8) {
        throw ResourceError("mobius_matrices: capped at 2k <= 8");
    }
    MobiusData md;
    md.order = enumerate_partitions(n_points);
    std::reverse(md.order.begin(), md.order.end());
    size_t P = md.order.size();
    md.K.n = md.K_inv.n = P;
    md.K.rows.resize(P);
    md.K_inv.rows.resize(P);
    for (size_t i = 0; i < P; i++) {
        for (size_t j = 0; j < P; j++) {
            if (refines(md.order[i], md.order[j])) {
                if (j < i) {
                    throw NumericError("mobius_matrices: order is not a linear extension");
                }
                md.K.rows[i].emplace_back((uint32_t)j, 1);
            }
        }
    }
    std::vector<int64_t> acc(P, 0);
    std::vector<char> mark(P, 0);
    std::vector<uint32_t> touched;
    for (size_t i = P; i-- > 0;) {
        touched.clear();
        acc[i] = 1;
        mark[i] = 1;
        touched.push_back((uint32_t)i);
        for (const auto &[l, one] : md.K.rows[i]) {
            if (l == i) continue;
            for (const auto &[c, v] : md.K_inv.rows[l]) {
                if (!mark[c]) {
                    mark[c] = 1;
                    touched.push_back(c);
                }
                acc[c] -= v;
            }
        }
        std::sort(touched.begin(), touched.end());
        for (uint32_t c : touched) {
            if (acc[c] != 0) md.K_inv.rows[i].emplace_back(c, acc[c]);
            acc[c] = 0;
            mark[c] = 0;
        }
    }
    return md;
}

inline MobiusData mobius_matrices(int k) {
    if (k < 1) {
        throw DomainError("mobius_matrices: k must be >= 1");
    }
    return mobius_matrices_points(2 * k);
}

/// Diagrams whose blocks all have equal top and bottom counts.
inline std::vector<SetPartitionDiagram> balanced_partitions(int k) {
    if (k < 1 || 2 * k > 10) {
        throw DomainError("balanced_partitions: need 1 <= k <= 5");
    }
    std::vector<SetPartitionDiagram> out;
    for (auto &p : enumerate_partitions(2 * k)) {
        std::vector<int> bal((size_t)p.num_blocks(), 0);
        for (int i = 0; i < 2 * k; i++) {
            bal[p.block_of((size_t)i)] += i < k ? 1 : -1;
        }
        if (std::all_of(bal.begin(), bal.end(), [](int v) { return v == 0; })) {
            out.emplace_back(k, std::move(p));
        }
    }
    return out;
}

namespace detail {

/// P[x][y] = [class(x) == class(y) and class kept] / |class|, x, y over N^{2k}.
inline MomentOperator kernel_class_projector(int k, int N, const std::function<bool(const SetPartition &)> &keep) {
    if (N < 2 * k) {
        throw DomainError("moment projector requires the stable range N >= 2k (N=" + std::to_string(N) +
                          ", k=" + std::to_string(k) + ")");
    }
    uint64_t D = ipow_sat((uint64_t)N, (unsigned)(2 * k));
    if (D > kDenseSideCap) {
        throw ResourceError("moment projector capped at N^{2k} <= 4096");
    }
    std::unordered_map<SetPartition, int, SetPartitionHash> ids;
    std::vector<int> cls(D);
    std::vector<int64_t> sizes;
    std::vector<char> kept;
    std::vector<int> labels((size_t)(2 * k));
    for (uint64_t x = 0; x < D; x++) {
        decode_digits(x, N, 2 * k, labels, 0);
        SetPartition p = kernel_partition(labels);
        auto it = ids.find(p);
        if (it == ids.end()) {
            it = ids.emplace(p, (int)sizes.size()).first;
            sizes.push_back(0);
            kept.push_back(keep(p) ? 1 : 0);
        }
        cls[x] = it->second;
        sizes[(size_t)it->second]++;
    }
    MomentOperator mo;
    mo.k = k;
    mo.N = N;
    mo.matrix = DenseOperator::Zero((Eigen::Index)D, (Eigen::Index)D);
    std::vector<std::vector<uint64_t>> members(sizes.size());
    for (uint64_t x = 0; x < D; x++) members[(size_t)cls[x]].push_back(x);
    for (size_t c = 0; c < members.size(); c++) {
        if (!kept[c]) continue;
        double w = 1.0 / (double)sizes[c];
        for (uint64_t x : members[c]) {
            for (uint64_t y : members[c]) {
                mo.matrix((Eigen::Index)x, (Eigen::Index)y) = w;
            }
        }
    }
    return mo;
}

}  // namespace detail

/// E over uniform permutations S of S^{(x)k} (x) S^{(x)k}: sum_Pi |O'_Pi)(O'_Pi| / ||O'_Pi||^2.
inline MomentOperator moment_projector_perm(int k, int N) {
    return detail::kernel_class_projector(k, N, [](const SetPartition &) { return true; });
}

/// Same for uniformly phased permutations: only balanced diagrams survive.
inline MomentOperator moment_projector_phased(int k, int N) {
    return detail::kernel_class_projector(k, N, [k](const SetPartition &p) {
        std::vector<int> bal((size_t)p.num_blocks(), 0);
        for (int i = 0; i < 2 * k; i++) bal[p.block_of((size_t)i)] += i < k ? 1 : -1;
        return std::all_of(bal.begin(), bal.end(), [](int v) { return v == 0; });
    });
}

/// Rank of the Gram matrix of vectorized O_Pi, via the exact Gram N^{c(Pi, Pi')}.
inline int diagram_gram_rank(int k, int N, double cutoff = 1e-8) {
    auto ds = enumerate_diagrams(k);
    Eigen::MatrixXd G((Eigen::Index)ds.size(), (Eigen::Index)ds.size());
    for (size_t i = 0; i < ds.size(); i++) {
        for (size_t j = 0; j < ds.size(); j++) {
            G((Eigen::Index)i, (Eigen::Index)j) = std::pow((double)N, inner_product_power(ds[i], ds[j]));
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    const auto &s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); i++) {
        if (s[i] > cutoff * s[0]) r++;
    }
    return r;
}

/// Same rank from dense vectorized realizations (the diagram Gram computed numerically).
inline int diagram_gram_rank_dense(int k, int N, double cutoff = 1e-8) {
    auto ds = enumerate_diagrams(k);
    auto D = (Eigen::Index)ipow((uint64_t)N, (unsigned)(2 * k));
    Eigen::MatrixXd X(D, (Eigen::Index)ds.size());
    for (size_t i = 0; i < ds.size(); i++) {
        IntMatrix m = dense_realize_int(ds[i], N);
        for (Eigen::Index r = 0; r < m.rows(); r++) {
            for (Eigen::Index c = 0; c < m.cols(); c++) {
                X(r * m.cols() + c, (Eigen::Index)i) = (double)m(r, c);
            }
        }
    }
    Eigen::MatrixXd G = X.transpose() * X;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    const auto &s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); i++) {
        if (s[i] > cutoff * s[0]) r++;
    }
    return r;
}

}  // namespace haarforge

#endif
