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

#ifndef HAARFORGE_CLI_HPP
#define HAARFORGE_CLI_HPP

#include <CLI11.hpp>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "haarforge/checks.hpp"

namespace haarforge::cli {

// ---- Configuration ----------------------------------------------------------------

struct RunConfig {
    EnsembleConfig ensemble;
    std::optional<uint64_t> samples;
    std::string suite;
};

inline const std::set<std::string> &config_keys() {
    static const std::set<std::string> keys{"N", "m", "ell", "k", "theta", "seed", "taylor_degree", "samples", "suite"};
    return keys;
}

/// Suites that need the partition algebra to be in its stable range N >= 2k.
inline bool suite_needs_stable_range(const std::string &suite) {
    return suite == "partition" || suite == "diagram" || suite == "irrep" || suite == "projector";
}

inline RunConfig config_from_json(const json &j) {
    if (!j.is_object()) {
        throw ConfigError("config: top level must be a JSON object");
    }
    std::vector<std::string> unknown, bad;
    for (const auto &[key, val] : j.items()) {
        if (!config_keys().count(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = "config: unknown keys:";
        for (const auto &u : unknown) msg += " " + u;
        throw ConfigError(msg);
    }
    RunConfig rc;
    auto get_int = [&](const char *key, int &dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) {
            bad.push_back(key);
            return;
        }
        dst = j[key].get<int>();
    };
    get_int("N", rc.ensemble.N);
    get_int("m", rc.ensemble.m);
    get_int("ell", rc.ensemble.ell);
    get_int("k", rc.ensemble.k);
    get_int("taylor_degree", rc.ensemble.taylor_degree);
    if (j.contains("theta")) {
        if (j["theta"].is_number()) {
            rc.ensemble.theta = j["theta"].get<double>();
        } else {
            bad.push_back("theta");
        }
    }
    if (j.contains("seed")) {
        if (j["seed"].is_number_unsigned() || (j["seed"].is_number_integer() && j["seed"].get<int64_t>() >= 0)) {
            rc.ensemble.seed = j["seed"].get<uint64_t>();
        } else {
            bad.push_back("seed");
        }
    }
    if (j.contains("samples")) {
        if (j["samples"].is_number_integer() && j["samples"].get<int64_t>() > 0) {
            rc.samples = j["samples"].get<uint64_t>();
        } else {
            bad.push_back("samples");
        }
    }
    if (j.contains("suite")) {
        if (j["suite"].is_string()) {
            rc.suite = j["suite"].get<std::string>();
        } else {
            bad.push_back("suite");
        }
    }
    if (!bad.empty()) {
        std::string msg = "config: invalid values for keys:";
        for (const auto &b : bad) msg += " " + b;
        throw ConfigError(msg);
    }
    try {
        rc.ensemble.validate();
        if (suite_needs_stable_range(rc.suite)) rc.ensemble.require_stable_range();
    } catch (const DomainError &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return rc;
}

inline RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return config_from_json(j);
}

// ---- Grids ------------------------------------------------------------------------

using Grid = std::vector<std::pair<std::string, std::vector<int64_t>>>;

/// "N=8,16,32;ell=1,2,4,8".
inline Grid parse_grid(const std::string &spec, const std::set<std::string> &allowed) {
    Grid g;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ';')) {
        if (part.empty()) continue;
        auto eq = part.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("grid: expected key=values in '" + part + "'");
        }
        std::string key = part.substr(0, eq);
        if (!allowed.count(key)) {
            throw ConfigError("grid: key '" + key + "' not allowed here");
        }
        for (const auto &[k2, v2] : g) {
            if (k2 == key) throw ConfigError("grid: duplicate key " + key);
        }
        std::vector<int64_t> vals;
        std::stringstream vs(part.substr(eq + 1));
        std::string tok;
        while (std::getline(vs, tok, ',')) {
            try {
                size_t used = 0;
                int64_t v = std::stoll(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                vals.push_back(v);
            } catch (const std::exception &) {
                throw ConfigError("grid: bad integer '" + tok + "' for " + key);
            }
        }
        if (vals.empty()) {
            throw ConfigError("grid: no values for " + key);
        }
        g.emplace_back(key, vals);
    }
    return g;
}

/// Cartesian product in row-major order (last key fastest).
inline std::vector<std::map<std::string, int64_t>> grid_cells(const Grid &g) {
    std::vector<std::map<std::string, int64_t>> cells{{}};
    for (const auto &[key, vals] : g) {
        std::vector<std::map<std::string, int64_t>> next;
        for (const auto &c : cells) {
            for (int64_t v : vals) {
                auto d = c;
                d[key] = v;
                next.push_back(d);
            }
        }
        cells = std::move(next);
    }
    return cells;
}

// ---- Output -----------------------------------------------------------------------

inline std::string utc_timestamp() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {
inline void flatten(const json &j, const std::string &prefix, std::vector<std::pair<std::string, std::string>> &out) {
    if (j.is_object()) {
        for (const auto &[k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_string()) {
        out.emplace_back(prefix, j.get<std::string>());
    } else {
        out.emplace_back(prefix, j.dump());
    }
}

inline std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) {
        if (c == '"') r += '"';
        r += c;
    }
    return r + "\"";
}
}  // namespace detail

/// Single writer for records; rows carry config hash and seed.
class RunWriter {
public:
    RunWriter(std::string out_dir, std::string format, std::string config_hash, uint64_t seed)
        : out_(std::move(out_dir)), format_(std::move(format)), hash_(std::move(config_hash)), seed_(seed) {}

    void add(json rec) {
        rec["config_hash"] = hash_;
        rec["seed"] = seed_;
        std::cout << rec.dump() << "\n";
        records_.push_back(std::move(rec));
    }

    const std::vector<json> &records() const {
        return records_;
    }

    std::vector<std::string> flush() {
        std::vector<std::string> paths;
        if (out_.empty()) return paths;
        std::filesystem::create_directories(out_);
        if (format_ == "json" || format_ == "both") {
            std::string p = out_ + "/results.jsonl";
            std::ofstream f(p);
            for (const auto &r : records_) f << r.dump() << "\n";
            paths.push_back(p);
        }
        if (format_ == "csv" || format_ == "both") {
            std::string p = out_ + "/summary.csv";
            std::vector<std::string> cols;
            std::vector<std::map<std::string, std::string>> rows;
            for (const auto &r : records_) {
                std::vector<std::pair<std::string, std::string>> flat;
                detail::flatten(r, "", flat);
                std::map<std::string, std::string> row;
                for (auto &[k, v] : flat) {
                    if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
                    row[k] = v;
                }
                rows.push_back(std::move(row));
            }
            std::ofstream f(p);
            for (size_t i = 0; i < cols.size(); i++) f << (i ? "," : "") << detail::csv_escape(cols[i]);
            f << "\n";
            for (const auto &row : rows) {
                for (size_t i = 0; i < cols.size(); i++) {
                    auto it = row.find(cols[i]);
                    f << (i ? "," : "") << (it == row.end() ? "" : detail::csv_escape(it->second));
                }
                f << "\n";
            }
            paths.push_back(p);
        }
        return paths;
    }

private:
    std::string out_, format_, hash_;
    uint64_t seed_;
    std::vector<json> records_;
};

struct RunManifest {
    std::vector<std::string> command_line;
    std::string config_hash;
    uint64_t seed = 0;
    std::string version = version_string();
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
    json parameters;

    json to_json() const {
        return json{{"command_line", command_line}, {"config_hash", config_hash}, {"seed", seed},
                    {"version", version},           {"started_at", started_at},   {"finished_at", finished_at},
                    {"outputs", outputs},           {"parameters", parameters}};
    }
};

// ---- Subcommands ------------------------------------------------------------------

struct Options {
    uint64_t seed = 0;
    std::string out;
    std::string format = "both";
    std::string config;
    uint64_t samples = 0;
    std::string grid;

    int N = 16, m = 2, ell = 4, k = 2, taylor_degree = 0;
    double theta = 0;
    int degree = 8;
    std::string ensemble;
    std::string check;
    std::string suite;
    uint64_t trials = 500;
    std::string words = "1;2;2,1";
    bool exact = false;
};

/// Stream ids per subcommand so runs with the same root seed do not share draws.
inline uint64_t command_stream(const std::string &name) {
    return fnv1a64("haarforge/" + name);
}

struct Context {
    std::string command;
    Options opt;
    EnsembleConfig ens;
    uint64_t samples = 0;
    json params;
    CLI::App *sub = nullptr;

    bool given(const std::string &flag) const {
        const CLI::Option *o = sub->get_option_no_throw(flag);
        return o != nullptr && o->count() > 0;
    }
    StreamSeed stream() const {
        return StreamSeed{opt.seed, command_stream(command)};
    }
};

/// Returns false when some check failed.
using Handler = std::function<bool(Context &, RunWriter &)>;

inline json record_json(const ExperimentRecord &r) {
    json j = r.to_json();
    j.erase("wall_time");
    return j;
}

inline bool cmd_theta(Context &c, RunWriter &w) {
    int m = c.opt.m;
    if (m < 1) throw DomainError("theta: m must be >= 1");
    double th = find_theta(m);
    double v = char_fn(KMSpec(m), th);
    w.add({{"command", "theta"}, {"m", m}, {"theta", th}, {"abs_v", std::abs(v)}, {"traceless_theta", find_traceless_theta(m)}});
    return true;
}

inline bool cmd_expand_words(Context &c, RunWriter &w) {
    int m = c.opt.m;
    double th = c.given("--theta") ? c.opt.theta : find_theta(m);
    WordCoefficients wc = expand_exponential(m, th, c.opt.degree);
    WeightStats ws = weight_stats(wc);
    w.add({{"command", "expand-words"},
           {"m", m},
           {"theta", th},
           {"degree", c.opt.degree},
           {"identity_coeff", wc.identity_coeff.real()},
           {"identity_coeff_imag", wc.identity_coeff.imag()},
           {"sum_sq", ws.sum_sq},
           {"max_abs", ws.max_abs},
           {"n_words", ws.n_words},
           {"tail_bound", taylor_tail_bound(m, th, c.opt.degree)}});
    return true;
}

inline bool cmd_diagram(Context &c, RunWriter &w) {
    int k = c.opt.k, N = c.opt.N;
    CheckResult r;
    if (c.opt.check == "mult") {
        r = check_diagram_mult(k, N);
    } else if (c.opt.check == "mobius") {
        r = check_diagram_mobius(k, N);
    } else if (c.opt.check == "rank") {
        r = check_diagram_rank(k, N);
    } else {
        r = check_projector(k, N);
    }
    json j = r.to_json();
    j["command"] = "diagram";
    w.add(j);
    return r.pass;
}

inline MomentOperator reference_moment(const std::string &ens, int k, int N) {
    if (ens == "haar" || ens == "V") return haar_moment_operator(k, N);
    if (ens == "ginibre") return ginibre_moment_structured(k, N).to_dense();
    if (ens == "perm") return moment_projector_perm(k, N);
    if (ens == "phased") return moment_projector_phased(k, N);
    throw DomainError("unknown ensemble: " + ens);
}

inline std::vector<int> grid_values(const Context &c, const std::string &key, std::vector<int> fallback) {
    if (c.opt.grid.empty()) return fallback;
    Grid g = parse_grid(c.opt.grid, {key});
    std::vector<int> out;
    for (int64_t v : g[0].second) out.push_back((int)v);
    return out;
}

inline bool cmd_moments(Context &c, RunWriter &w) {
    const std::string &ens = c.opt.ensemble.empty() ? std::string("haar") : c.opt.ensemble;
    int k = c.ens.k;
    std::vector<int> Ns = grid_values(c, "N", {c.ens.N});
    if (ens == "ginibre-vs-haar") {
        std::vector<double> logN, logd;
        for (int N : Ns) {
            auto g = ginibre_moment_structured(k, N);
            auto h = haar_moment_structured(k, N);
            double fro = moment_distance(g, h, NormKind::frobenius);
            double rel = fro / h.frobenius_norm();
            logN.push_back(std::log((double)N));
            logd.push_back(std::log(rel));
            w.add({{"command", "moments"}, {"ensemble", ens}, {"k", k}, {"N", N}, {"frobenius", fro},
                   {"relative_frobenius", rel}, {"spectral", moment_distance(g, h, NormKind::spectral)}});
        }
        if (Ns.size() >= 2) {
            double mx = 0, my = 0;
            for (size_t i = 0; i < logN.size(); i++) mx += logN[i], my += logd[i];
            mx /= (double)logN.size();
            my /= (double)logN.size();
            double sxy = 0, sxx = 0;
            for (size_t i = 0; i < logN.size(); i++) {
                sxy += (logN[i] - mx) * (logd[i] - my);
                sxx += (logN[i] - mx) * (logN[i] - mx);
            }
            w.add({{"command", "moments"}, {"summary", "loglog_slope"}, {"slope", sxy / sxx}});
        }
        return true;
    }
    for (size_t i = 0; i < Ns.size(); i++) {
        EnsembleConfig e = c.ens;
        e.N = Ns[i];
        McMoment mc = mc_moment_operator(make_sampler(ens, e), k, e.N, c.samples, c.stream().child(i));
        MomentOperator ref = reference_moment(ens, k, e.N);
        Eigen::MatrixXd z = (mc.mean.matrix - ref.matrix).cwiseAbs().cwiseQuotient(mc.std_error.cwiseMax(1e-300));
        double zmax = 0;
        for (Eigen::Index a = 0; a < z.rows(); a++) {
            for (Eigen::Index b = 0; b < z.cols(); b++) {
                if (mc.std_error(a, b) > 0) zmax = std::max(zmax, z(a, b));
                else if (std::abs(mc.mean.matrix(a, b) - ref.matrix(a, b)) > 1e-12) zmax = INFINITY;
            }
        }
        w.add({{"command", "moments"}, {"ensemble", ens}, {"k", k}, {"N", e.N}, {"samples", c.samples},
               {"frobenius", moment_distance(mc.mean, ref, NormKind::frobenius)},
               {"spectral", moment_distance(mc.mean, ref, NormKind::spectral)}, {"max_abs_z", zmax},
               {"batches", mc.batches}, {"norm_proxy", "diamond norm not computed"}});
    }
    return true;
}

inline bool cmd_frame_potential(Context &c, RunWriter &w) {
    const std::string &ens = c.opt.ensemble.empty() ? std::string("V") : c.opt.ensemble;
    int k = c.ens.k;
    Estimate e = frame_potential(make_sampler(ens, c.ens), k, c.samples, c.stream());
    double haar = 1;
    for (int i = 2; i <= k; i++) haar *= i;
    json cfg = {{"N", c.ens.N}, {"k", k}};
    if (ens == "V") {
        cfg["m"] = c.ens.m;
        cfg["ell"] = c.ens.ell;
        cfg["theta"] = c.ens.resolved_theta();
    }
    w.add({{"command", "frame-potential"}, {"ensemble", ens}, {"config", cfg}, {"value", e.value},
           {"std_error", e.std_error}, {"pairs", e.n}, {"haar_value", haar},
           {"z_vs_haar", e.std_error > 0 ? (e.value - haar) / e.std_error : 0.0}});
    return true;
}

inline std::vector<FreeWord> parse_words(const std::string &s) {
    std::vector<FreeWord> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        if (!tok.empty()) out.push_back(FreeWord::parse(tok));
    }
    return out;
}

inline bool cmd_freeness(Context &c, RunWriter &w) {
    auto words = parse_words(c.opt.words);
    std::vector<int> Ns = grid_values(c, "N", {64, 128, 256, 512, 1024, 2048, 4096});
    if (c.opt.exact) {
        for (int N : Ns) {
            w.add({{"command", "freeness"}, {"mode", "exact"}, {"N", N}, {"words", c.opt.words},
                   {"tv", freeness_tv_exact(words, N)}});
        }
        return true;
    }
    auto recs = freeness_experiment(words, Ns, c.samples, c.stream());
    std::vector<double> scaled;
    for (const auto &r : recs) {
        json j = record_json(r);
        j["command"] = "freeness";
        w.add(j);
        scaled.push_back(r.value * r.config["N"].get<double>());
    }
    double lc = 0;
    for (double s : scaled) lc += std::log(s);
    double cfit = std::exp(lc / (double)scaled.size());
    double worst = 1;
    for (double s : scaled) worst = std::max(worst, std::max(s / cfit, cfit / s));
    w.add({{"command", "freeness"}, {"summary", "c_over_N_fit"}, {"c", cfit}, {"max_factor", worst},
           {"within_factor_2", worst <= 2.0}});
    return true;
}

inline bool cmd_lindeberg(Context &c, RunWriter &w) {
    int N = c.given("--N") ? c.opt.N : 64;
    std::vector<int> ms = grid_values(c, "m", {2, 4, 8, 16});
    std::vector<double> v, se;
    for (size_t i = 0; i < ms.size(); i++) {
        if (ms[i] < 1) throw DomainError("lindeberg: term count must be >= 1");
        std::vector<double> wts((size_t)ms[i], 1.0 / std::sqrt((double)ms[i]));
        double s2 = 0;
        for (double x : wts) s2 += x * x;
        // Rescale so the weights pass the exact unit-norm test despite rounding.
        for (double &x : wts) x /= std::sqrt(s2);
        ExperimentRecord r = lindeberg_experiment(wts, c.ens.k, N, c.samples, c.stream().child(i));
        r.config.erase("weights");
        json j = record_json(r);
        j["command"] = "lindeberg";
        w.add(j);
        v.push_back(r.extra["d2"].get<double>());
        se.push_back(r.extra["d2_se"].get<double>());
    }
    MonotoneSummary ms2 = monotone_check(v, se, true);
    w.add({{"command", "lindeberg"}, {"summary", "strictly_decreasing_d2_beyond_2sigma"}, {"holds", ms2.holds},
           {"margins", ms2.margins}});
    return true;
}

inline bool cmd_design_report(Context &c, RunWriter &w) {
    std::string gs = c.opt.grid.empty() ? "ell=1,2,4,8" : c.opt.grid;
    Grid g = parse_grid(gs, {"N", "m", "ell", "k"});
    auto cells = grid_cells(g);
    std::vector<EnsembleConfig> cfgs;
    for (const auto &cell : cells) {
        EnsembleConfig e = c.ens;
        for (const auto &[key, val] : cell) {
            if (key == "N") e.N = (int)val;
            if (key == "m") e.m = (int)val;
            if (key == "ell") e.ell = (int)val;
            if (key == "k") e.k = (int)val;
        }
        e.validate();
        if (!e.theta) e.theta = find_theta(e.m);
        cfgs.push_back(e);
    }
    auto recs = design_report(cfgs, c.samples, c.stream());
    for (const auto &r : recs) {
        json j = record_json(r);
        j["command"] = "design-report";
        w.add(j);
    }
    // Monotonicity along each axis with more than one value, other axes fixed.
    for (size_t ax = 0; ax < g.size(); ax++) {
        if (g[ax].second.size() < 2) continue;
        std::map<std::vector<int64_t>, std::vector<size_t>> groups;
        for (size_t i = 0; i < cells.size(); i++) {
            std::vector<int64_t> key;
            for (size_t b = 0; b < g.size(); b++) {
                if (b != ax) key.push_back(cells[i].at(g[b].first));
            }
            groups[key].push_back(i);
        }
        bool holds = true;
        json margins = json::array();
        for (const auto &[key, idx] : groups) {
            std::vector<double> v, se;
            for (size_t i : idx) {
                v.push_back(recs[i].value);
                se.push_back(recs[i].std_error);
            }
            auto ms = monotone_check(v, se, false);
            holds &= ms.holds;
            margins.push_back(ms.margins);
        }
        w.add({{"command", "design-report"}, {"summary", "nonincreasing_beyond_2sigma"}, {"axis", g[ax].first},
               {"holds", holds}, {"margins", margins}});
    }
    return true;
}

inline bool cmd_markov(Context &c, RunWriter &w) {
    auto rep = markov_suite(c.opt.suite, c.opt.trials, c.stream());
    json j = rep.to_json();
    j["command"] = "markov";
    w.add(j);
    return rep.passed();
}

/// Quick invariant suite; each entry runs in well under a second.
inline std::vector<CheckResult> selftest_checks() {
    std::vector<CheckResult> out;
    auto add = [&](const std::string &name, bool pass, json detail = json::object()) {
        out.push_back({name, pass, std::move(detail)});
    };
    Rng rng(12345);
    Permutation p = sample_uniform_permutation(7, rng);
    add("permutation_inverse", compose(p, p.inverse()).is_identity());
    PhasedPermutation z = sample_phased_permutation(9, rng);
    add("phased_unitary", unitarity_defect(z.dense()) <= 1e-12);
    double th2 = find_theta(2);
    add("theta_m2", std::abs(th2 - 2.404825557695773 / std::sqrt(2.0)) <= 1e-6, {{"theta", th2}});
    add("km_mass", std::abs(km_total_mass(KMSpec(3)) - 1.0) <= 1e-10);
    bool bell_ok = true;
    const uint64_t bell[] = {1, 1, 2, 5, 15, 52, 203};
    for (int n = 1; n <= 6; n++) bell_ok &= enumerate_partitions(n).size() == bell[n];
    add("bell_numbers", bell_ok);
    out.push_back(check_diagram_mult(1, 3));
    out.push_back(check_diagram_rank(1, 2));
    bool hook_ok = true;
    for (int n = 1; n <= 6; n++) {
        for (const auto &sh : enumerate_integer_partitions(n)) hook_ok &= hook_count(sh) == enumerate_syt(sh).size();
    }
    add("hook_formula", hook_ok);
    MomentOperator h = haar_moment_operator(2, 2);
    add("haar_projector", max_abs_entry(h.matrix * h.matrix - h.matrix) <= 1e-10);
    add("ginibre_wick", max_abs_entry(ginibre_moment_operator(2, 2).matrix -
                                      ginibre_moment_structured(2, 2).to_dense().matrix) <= 1e-14);
    out.push_back(check_kwise_l1_uniform(3, 2));
    add("markov_witness", witness_error() <= 1e-6);
    FreeWord wd = FreeWord::parse("1,2,-1");
    add("word_inverse", reduce_concat(wd, wd.inverse()).empty());
    return out;
}

inline bool cmd_selftest(Context &, RunWriter &w) {
    bool all = true;
    for (const auto &r : selftest_checks()) {
        json j = r.to_json();
        j["command"] = "selftest";
        w.add(j);
        all &= r.pass;
    }
    return all;
}

// ---- Entry point ------------------------------------------------------------------

inline int run(int argc, const char *const *argv) {
    CLI::App app{"haarforge: unitary designs from sparse exponentials"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);
    Options opt;
    std::vector<std::pair<CLI::App *, Handler>> subs;
    std::map<CLI::App *, std::string> names;

    auto common = [&](CLI::App *s, uint64_t default_samples) {
        s->add_option("--seed", opt.seed, "root seed");
        s->add_option("--out", opt.out, "output directory");
        s->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"json", "csv", "both"}));
        s->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
        if (default_samples) s->add_option("--samples", opt.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
        s->add_option("--grid", opt.grid, "parameter grid, e.g. N=8,16;ell=1,2");
    };
    auto ens_flags = [&](CLI::App *s) {
        s->add_option("--N", opt.N, "dimension");
        s->add_option("--m", opt.m, "generators per exponential");
        s->add_option("--ell", opt.ell, "number of exponentials");
        s->add_option("--k", opt.k, "moment order");
        s->add_option("--theta", opt.theta, "angle (default: theta_m)");
        s->add_option("--taylor-degree", opt.taylor_degree, "0 for exact exponentials");
    };
    auto reg = [&](const std::string &name, const std::string &desc, Handler h) {
        CLI::App *s = app.add_subcommand(name, desc);
        subs.emplace_back(s, std::move(h));
        names[s] = name;
        return s;
    };
    std::map<std::string, uint64_t> default_samples{{"moments", 20000},   {"frame-potential", 10000},
                                                    {"freeness", 100000}, {"lindeberg", 10000},
                                                    {"design-report", 10000}};

    auto *s = reg("theta", "Kesten-McKay angle theta_m", cmd_theta);
    common(s, 0);
    s->add_option("--m", opt.m, "m")->required();

    s = reg("expand-words", "word expansion of one exponential", cmd_expand_words);
    common(s, 0);
    s->add_option("--m", opt.m, "generators");
    s->add_option("--theta", opt.theta, "angle (default: theta_m)");
    s->add_option("--degree", opt.degree, "truncation degree")->check(CLI::NonNegativeNumber);

    s = reg("diagram", "partition-algebra checks", cmd_diagram);
    common(s, 0);
    s->add_option("--k", opt.k, "k")->check(CLI::Range(1, 4));
    s->add_option("--N", opt.N, "N (default 5)");
    s->add_option("--check", opt.check, "check")->required()->check(CLI::IsMember({"mult", "mobius", "rank", "projector"}));

    s = reg("moments", "moment operators against exact references", cmd_moments);
    common(s, 1);
    ens_flags(s);
    s->add_option("--ensemble", opt.ensemble, "haar|ginibre|perm|phased|V|ginibre-vs-haar")
        ->check(CLI::IsMember({"haar", "ginibre", "perm", "phased", "V", "ginibre-vs-haar"}));

    s = reg("frame-potential", "Monte Carlo frame potential", cmd_frame_potential);
    common(s, 1);
    ens_flags(s);
    s->add_option("--ensemble", opt.ensemble, "haar|ginibre|perm|phased|V")
        ->check(CLI::IsMember({"haar", "ginibre", "perm", "phased", "V"}));

    s = reg("freeness", "TV distance of word images to independent uniforms", cmd_freeness);
    common(s, 1);
    s->add_option("--words", opt.words, "words separated by ';', letters by ','");
    s->add_flag("--exact", opt.exact, "enumerate all generator tuples (N <= 6)");

    s = reg("lindeberg", "weighted sums of phased permutations against Ginibre", cmd_lindeberg);
    common(s, 1);
    s->add_option("--N", opt.N, "dimension (default 64)");
    s->add_option("--k", opt.k, "moment order");

    s = reg("design-report", "distance of V to Haar over a grid", cmd_design_report);
    common(s, 1);
    ens_flags(s);

    s = reg("markov", "randomized Markov-inequality suites", cmd_markov);
    common(s, 0);
    s->add_option("--suite", opt.suite, "suite")->required()->check(CLI::IsMember({"classic", "largeN", "poles"}));
    s->add_option("--trials", opt.trials, "instances")->check(CLI::PositiveNumber);

    s = reg("selftest", "quick invariant suite", cmd_selftest);
    common(s, 0);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    CLI::App *chosen = nullptr;
    Handler handler;
    for (auto &[sp, h] : subs) {
        if (sp->parsed()) {
            chosen = sp;
            handler = h;
        }
    }
    Context ctx;
    ctx.command = names[chosen];
    ctx.sub = chosen;
    auto has = [&](const std::string &flag) { return ctx.given(flag); };
    RunManifest man;
    for (int i = 0; i < argc; i++) man.command_line.emplace_back(argv[i]);
    man.started_at = utc_timestamp();

    auto emit_error = [&](const std::string &kind, const std::string &what) {
        json d = {{"error", what}, {"kind", kind}, {"command", ctx.command}};
        std::cerr << d.dump() << "\n";
        return d;
    };

    try {
        RunConfig rc;
        if (!opt.config.empty()) {
            rc = load_config(opt.config);
            if (!has("--seed")) opt.seed = rc.ensemble.seed;
        }
        EnsembleConfig e = rc.ensemble;
        if (has("--N")) e.N = opt.N;
        if (has("--m")) e.m = opt.m;
        if (has("--ell")) e.ell = opt.ell;
        if (has("--k")) e.k = opt.k;
        if (has("--theta")) e.theta = opt.theta;
        if (has("--taylor-degree")) e.taylor_degree = opt.taylor_degree;
        e.seed = opt.seed;
        if (ctx.command == "diagram") {
            if (!has("--N")) opt.N = 5;
            if (!has("--k")) opt.k = e.k;
        }
        if (ctx.command == "expand-words" && !has("--m")) opt.m = e.m;
        try {
            e.validate();
        } catch (const DomainError &err) {
            throw ConfigError(err.what());
        }
        ctx.ens = e;
        ctx.samples = has("--samples") ? opt.samples
                      : rc.samples                ? *rc.samples
                      : default_samples.count(ctx.command) ? default_samples[ctx.command]
                                                            : 0;
        ctx.opt = opt;
        if (!opt.grid.empty() && ctx.command != "moments" && ctx.command != "freeness" && ctx.command != "lindeberg" &&
            ctx.command != "design-report") {
            throw ConfigError("--grid is not used by " + ctx.command);
        }

        json params = {{"command", ctx.command},
                       {"N", e.N},
                       {"m", e.m},
                       {"ell", e.ell},
                       {"k", e.k},
                       {"theta", e.theta ? json(*e.theta) : json(nullptr)},
                       {"taylor_degree", e.taylor_degree},
                       {"seed", opt.seed},
                       {"samples", ctx.samples},
                       {"grid", opt.grid},
                       {"ensemble", opt.ensemble},
                       {"check", opt.check},
                       {"suite", opt.suite},
                       {"trials", opt.trials},
                       {"words", opt.words},
                       {"exact", opt.exact},
                       {"degree", opt.degree},
                       {"diagram_N", opt.N},
                       {"diagram_k", opt.k}};
        ctx.params = params;
        man.parameters = params;
        man.config_hash = hex64(fnv1a64(params.dump()));
        man.seed = opt.seed;

        RunWriter writer(opt.out, opt.format, man.config_hash, opt.seed);
        bool ok = true;
        int code = 0;
        try {
            ok = handler(ctx, writer);
            code = ok ? 0 : 1;
        } catch (const ConfigError &err) {
            emit_error("config", err.what());
            return 2;
        } catch (const DomainError &err) {
            writer.add(emit_error("domain", err.what()));
            code = 2;
        } catch (const std::exception &err) {
            writer.add(emit_error("numeric", err.what()));
            code = 1;
        }
        man.outputs = writer.flush();
        man.finished_at = utc_timestamp();
        if (!opt.out.empty()) {
            std::string mp = opt.out + "/manifest.json";
            man.outputs.push_back(mp);
            std::ofstream(mp) << man.to_json().dump(2) << "\n";
        }
        std::cerr << json{{"manifest", man.to_json()}}.dump() << "\n";
        return code;
    } catch (const ConfigError &err) {
        emit_error("config", err.what());
        return 2;
    } catch (const std::exception &err) {
        emit_error("numeric", err.what());
        return 1;
    }
}

}  // namespace haarforge::cli

#endif
