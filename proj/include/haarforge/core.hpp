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

#ifndef HAARFORGE_CORE_HPP
#define HAARFORGE_CORE_HPP

#include <algorithm>
#include <atomic>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#ifndef HAARFORGE_VERSION_STRING
#define HAARFORGE_VERSION_STRING "0.1.0"
#endif

namespace haarforge {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using DenseOperator = Eigen::MatrixXcd;
using Rng = std::mt19937_64;
using json = nlohmann::json;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

inline const char *version_string() {
    return HAARFORGE_VERSION_STRING;
}

// Error taxonomy. All derive from std::runtime_error so callers can catch broadly.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &msg) {
    if (!cond) {
        throw DomainError(msg);
    }
}

/// SplitMix64 finalizer. Used to derive independent stream seeds from one root seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for sample `index` of stream `stream` under `root`.
///
/// seed = mix(mix(mix(root) ^ stream) ^ index). Every sample owns its own
/// generator, so results do not depend on thread count or scheduling.
inline uint64_t derive_seed(uint64_t root, uint64_t stream, uint64_t index) {
    uint64_t s = splitmix64(root);
    s = splitmix64(s ^ (stream * 0xD1B54A32D192ED03ULL));
    s = splitmix64(s ^ (index * 0xABC98388FB8FAC03ULL));
    return s;
}

struct StreamSeed {
    uint64_t root = 0;
    uint64_t stream = 0;

    Rng at(uint64_t index) const {
        return Rng(derive_seed(root, stream, index));
    }
    StreamSeed child(uint64_t sub) const {
        return StreamSeed{derive_seed(root, stream, 0xFFFFFFFF00000000ULL + sub), 0};
    }
};

/// Uniform double in [0, 1) using the top 53 bits.
inline double uniform01(Rng &rng) {
    return (double)(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased integer in [0, n).
inline uint64_t uniform_below(Rng &rng, uint64_t n) {
    std::uniform_int_distribution<uint64_t> dist(0, n - 1);
    return dist(rng);
}

inline Complex unit_phase(double turns) {
    double a = 2.0 * kPi * turns;
    return {std::cos(a), std::sin(a)};
}

/// Worker count: HAARFORGE_THREADS if set, else hardware concurrency.
inline size_t worker_count() {
    size_t hw = std::max<size_t>(1, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("HAARFORGE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) {
            return std::min<size_t>((size_t)v, 256);
        }
    }
    return hw;
}

/// Runs body(i) for i in [0, n) over worker threads. Dynamic scheduling; body must
/// write only to slot i of any shared output.
inline void parallel_for(size_t n, const std::function<void(size_t)> &body) {
    size_t workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; i++) {
            body(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    pool.reserve(workers);
    for (size_t w = 0; w < workers; w++) {
        pool.emplace_back([&]() {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) {
                    return;
                }
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Kahan-compensated accumulator.
template <typename T>
struct KahanSum {
    T sum{};
    T comp{};
    void add(const T &x) {
        T y = x - comp;
        T t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    T value() const {
        return sum;
    }
};

inline double max_abs_entry(const DenseOperator &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double unitarity_defect(const DenseOperator &u) {
    DenseOperator d = u.adjoint() * u;
    d -= DenseOperator::Identity(u.rows(), u.cols());
    return max_abs_entry(d);
}

inline double hermiticity_defect(const DenseOperator &h) {
    return max_abs_entry(h - h.adjoint());
}

inline uint64_t ipow(uint64_t base, unsigned e) {
    uint64_t r = 1;
    for (unsigned i = 0; i < e; i++) {
        r *= base;
    }
    return r;
}

/// Saturating power, returns UINT64_MAX on overflow.
inline uint64_t ipow_sat(uint64_t base, unsigned e) {
    uint64_t r = 1;
    for (unsigned i = 0; i < e; i++) {
        if (base != 0 && r > UINT64_MAX / base) {
            return UINT64_MAX;
        }
        r *= base;
    }
    return r;
}

/// Vectorized superoperator E[U^{(x)k} (x) conj(U)^{(x)k}], shape N^{2k} x N^{2k}.
/// Vectorization is row-major: |i><j| maps to |i>|j>.
struct MomentOperator {
    int k = 1;
    int N = 1;
    DenseOperator matrix;
};

inline constexpr uint64_t kDenseSideCap = 4096;

// ---- Serialization ---------------------------------------------------------

inline constexpr char kOperatorMagic[8] = {'H', 'F', 'D', 'O', 'P', 'v', '1', '\0'};

namespace detail {
inline void put_u64_le(std::ostream &out, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; i++) {
        b[i] = (unsigned char)(v >> (8 * i));
    }
    out.write((const char *)b, 8);
}
inline uint64_t get_u64_le(std::istream &in) {
    unsigned char b[8];
    in.read((char *)b, 8);
    if (!in) {
        throw DomainError("truncated operator file");
    }
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) {
        v |= (uint64_t)b[i] << (8 * i);
    }
    return v;
}
inline void put_f64_le(std::ostream &out, double d) {
    put_u64_le(out, std::bit_cast<uint64_t>(d));
}
inline double get_f64_le(std::istream &in) {
    return std::bit_cast<double>(get_u64_le(in));
}
}  // namespace detail

/// Binary layout: 8-byte magic, u64 LE dim, then dim*dim (re, im) f64 LE pairs, row-major.
inline void write_operator_binary(std::ostream &out, const DenseOperator &m) {
    require(m.rows() == m.cols(), "operator must be square");
    out.write(kOperatorMagic, 8);
    detail::put_u64_le(out, (uint64_t)m.rows());
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            detail::put_f64_le(out, m(r, c).real());
            detail::put_f64_le(out, m(r, c).imag());
        }
    }
}

inline DenseOperator read_operator_binary(std::istream &in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kOperatorMagic, 8) != 0) {
        throw DomainError("bad operator magic");
    }
    uint64_t dim = detail::get_u64_le(in);
    if (dim > (1ULL << 16)) {
        throw ResourceError("operator dimension too large: " + std::to_string(dim));
    }
    DenseOperator m((Eigen::Index)dim, (Eigen::Index)dim);
    for (uint64_t r = 0; r < dim; r++) {
        for (uint64_t c = 0; c < dim; c++) {
            double re = detail::get_f64_le(in);
            double im = detail::get_f64_le(in);
            m((Eigen::Index)r, (Eigen::Index)c) = {re, im};
        }
    }
    return m;
}

inline void save_operator(const std::string &path, const DenseOperator &m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot open for writing: " + path);
    }
    write_operator_binary(f, m);
}

inline DenseOperator load_operator(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot open: " + path);
    }
    return read_operator_binary(f);
}

inline json complex_to_json(Complex z) {
    return json::array({z.real(), z.imag()});
}

/// JSON form, only for small operators (dim <= 8).
inline json operator_to_json(const DenseOperator &m) {
    if (m.rows() > 8) {
        throw ResourceError("JSON operator dump limited to dim <= 8");
    }
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); r++) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); c++) {
            row.push_back(complex_to_json(m(r, c)));
        }
        rows.push_back(row);
    }
    return json{{"dim", m.rows()}, {"entries", rows}};
}

inline DenseOperator operator_from_json(const json &j) {
    auto dim = j.at("dim").get<Eigen::Index>();
    DenseOperator m(dim, dim);
    const auto &rows = j.at("entries");
    require((Eigen::Index)rows.size() == dim, "row count mismatch");
    for (Eigen::Index r = 0; r < dim; r++) {
        require((Eigen::Index)rows[r].size() == dim, "column count mismatch");
        for (Eigen::Index c = 0; c < dim; c++) {
            m(r, c) = {rows[r][c][0].get<double>(), rows[r][c][1].get<double>()};
        }
    }
    return m;
}

/// FNV-1a 64, used for config hashes.
inline uint64_t fnv1a64(const std::string &s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char *digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; i--) {
        s[i] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

}  // namespace haarforge

#endif
