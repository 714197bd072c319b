// Copyright 2026 The ftlab Authors
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

#ifndef FTLAB_CLI_HPP
#define FTLAB_CLI_HPP

/// \file cli.hpp
/// Experiment configs, the six analysis commands, and report writing.
///
/// Config: {command, seed?, output?: {path?, format?}, params: {...}}.
/// Exit codes: 0 success, 2 invalid input, 3 cap or budget refusal,
/// 1 internal error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unistd.h>

#include "ftlab/faultpaths.hpp"
#include "ftlab/io.hpp"
#include "ftlab/threshold.hpp"

namespace ftlab::cli {

inline constexpr const char *kVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kInvalid = 2,
    kRefused = 3,
};

inline const std::vector<std::string> &commands() {
    static const std::vector<std::string> names{"strength", "accuracy", "faultpaths", "truncate", "levelred", "threshold"};
    return names;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::size_t workers = 1;
};

/// A finished command: summary values, one record per table row, and the
/// table's columns.
struct CommandOutput {
    json results = json::object();
    json records = json::array();
    std::vector<std::string> columns;
};

struct Context {
    std::optional<std::uint64_t> seed;
    std::size_t workers = 1;
    json resolved_params = json::object();

    std::uint64_t require_seed(const char *why) const {
        if (!seed) {
            throw ValidationError(std::string("a seed is required because ") + why + " samples randomly");
        }
        return *seed;
    }
};

namespace detail {

inline DiamondOptions diamond_options(io::Fields &f, const Context &ctx) {
    DiamondOptions opt;
    opt.restarts = static_cast<std::size_t>(f.integer("restarts", 32));
    if (opt.restarts == 0) {
        f.fail("'restarts' must be at least 1");
    }
    opt.tol = f.number("tol", 1e-8);
    opt.seed = ctx.seed.value_or(0);
    opt.workers = ctx.workers;
    return opt;
}

inline json term_list_terms(const json &in, const std::string &where, std::vector<HamiltonianTerm> &terms,
                            bool need_pair) {
    if (!in.is_array() || in.empty()) {
        throw ValidationError(where + ": 'terms' must be a nonempty array");
    }
    json out = json::array();
    for (std::size_t i = 0; i < in.size(); ++i) {
        const std::string tw = where + "[" + std::to_string(i) + "]";
        json r = json::object();
        io::Fields f(in[i], r, tw);
        HamiltonianTerm t;
        t.op = io::parse_matrix(f.raw("op"), tw + ".op");
        if (f.has("support")) {
            t.support = f.index_list("support");
        } else {
            t.support.resize(t.op.dims().size());
            std::iota(t.support.begin(), t.support.end(), std::size_t{0});
            r["support"] = t.support;
        }
        if (need_pair) {
            const auto p = f.index_list("pair");
            if (p.size() != 2) {
                f.fail("'pair' must list two qubit indices");
            }
            t.pair = std::array<std::size_t, 2>{p[0], p[1]};
            t.label = f.string("label", std::to_string(p[0]) + "-" + std::to_string(p[1]));
        } else {
            t.label = f.string("label", "0");
        }
        if (t.support.size() != t.op.dims().size()) {
            f.fail("support size does not match the operator's subsystems");
        }
        if (!is_hermitian(t.op, 1e-12)) {
            f.fail("operator is not Hermitian");
        }
        f.finish();
        out.push_back(r);
        terms.push_back(std::move(t));
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// strength

inline CommandOutput cmd_strength(const json &params, Context &ctx) {
    io::Fields f(params, ctx.resolved_params, "params");
    const DiamondOptions opt = detail::diamond_options(f, ctx);
    const json &models = f.take("models");
    if (!models.is_array() || models.empty()) {
        f.fail("'models' must be a nonempty array");
    }
    CommandOutput out;
    out.columns = {"index", "kind", "epsilon", "lower", "upper", "valid"};
    json &rmodels = ctx.resolved_params["models"] = json::array();
    for (std::size_t i = 0; i < models.size(); ++i) {
        const std::string mw = "params.models[" + std::to_string(i) + "]";
        const json &m = models[i];
        if (!m.is_object() || !m.contains("kind") || !m["kind"].is_string()) {
            throw ValidationError(mw + ": each model needs a string 'kind'");
        }
        const std::string kind = m["kind"].get<std::string>();
        json rec = {{"index", i}, {"kind", kind}};
        json r = json::object();
        if (kind == "local_hamiltonian" || kind == "leakage" || kind == "long_range") {
            io::Fields mf(m, r, mw);
            mf.string("kind");
            const double t0 = mf.number("t0");
            if (!(t0 >= 0)) {
                mf.fail("'t0' must be non-negative");
            }
            std::vector<HamiltonianTerm> terms;
            const bool pairs = kind == "long_range";
            r["terms"] = detail::term_list_terms(mf.take("terms"), mw + ".terms", terms, pairs);
            if (pairs) {
                const double c = mf.number("c", 2 * std::numbers::e);
                if (!(c > 0)) {
                    mf.fail("'c' must be positive");
                }
                const auto lr = strength_long_range(terms, t0, c);
                rec["epsilon"] = lr.epsilon;
                rec["valid"] = lr.valid;
            } else {
                rec["epsilon"] = strength_local_hamiltonian(terms, t0);
            }
            mf.finish();
        } else if (kind == "gaussian") {
            io::Fields mf(m, r, mw);
            mf.string("kind");
            CorrelationGrid g;
            g.cells = static_cast<std::size_t>(mf.integer("cells"));
            g.labels = static_cast<std::size_t>(mf.integer("labels", 3));
            g.cell_volume = mf.number("cell_volume", 1.0);
            const double c = mf.number("c");
            if (!(c > 0)) {
                mf.fail("'c' must be positive");
            }
            const json &d = mf.raw("delta_abs");
            const std::size_t n = g.cells * g.labels;
            if (!d.is_array() || d.size() != n) {
                mf.fail("'delta_abs' must be a " + std::to_string(n) + "x" + std::to_string(n) + " array");
            }
            g.delta_abs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (std::size_t a = 0; a < n; ++a) {
                if (!d[a].is_array() || d[a].size() != n) {
                    mf.fail("'delta_abs' rows must have " + std::to_string(n) + " entries");
                }
                for (std::size_t b = 0; b < n; ++b) {
                    g.delta_abs(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = mf.as_number(d[a][b], "delta_abs");
                }
            }
            const json &regions = mf.raw("gate_regions");
            if (!regions.is_array()) {
                mf.fail("'gate_regions' must be an array of cell lists");
            }
            for (const auto &reg : regions) {
                if (!reg.is_array()) {
                    mf.fail("'gate_regions' must be an array of cell lists");
                }
                std::vector<std::size_t> cells;
                for (const auto &x : reg) {
                    cells.push_back(static_cast<std::size_t>(mf.as_integer(x, "gate_regions")));
                }
                g.gate_regions.push_back(std::move(cells));
            }
            mf.finish();
            try {
                rec["epsilon"] = strength_gaussian(g, c);
            } catch (const std::logic_error &e) {
                throw ValidationError(mw + ": " + e.what());
            }
        } else if (kind == "unitary_coupling") {
            io::Fields mf(m, r, mw);
            mf.string("kind");
            const Matrix n = io::parse_matrix(mf.raw("unitary"), mw + ".unitary");
            if (!is_unitary(n)) {
                mf.fail("'unitary' is not unitary");
            }
            mf.finish();
            rec["epsilon"] = strength_unitary_coupling(n);
        } else {
            const NoiseSpec spec = io::parse_noise_spec(m, r, mw);
            const Channel ch = io::checked_noise_channel(spec, mw);
            const auto b = diamond_distance(ch, identity_channel(ch.dims()), opt);
            rec["epsilon"] = b.upper;
            rec["lower"] = b.lower;
            rec["upper"] = b.upper;
            if (const auto *a = std::get_if<AmplitudeDamping>(&spec)) {
                rec["gamma"] = a->gamma();
            }
        }
        rmodels.push_back(r);
        out.records.push_back(rec);
    }
    f.finish();
    return out;
}

// ---------------------------------------------------------------------------
// accuracy / faultpaths shared setup

struct CircuitSetup {
    Circuit circuit;
    std::vector<io::NoiseEntry> noise;
    NoiseMap noise_map;
    std::optional<EnvironmentSpec> env;
    double epsilon = 0;
};

inline CircuitSetup load_circuit_setup(io::Fields &f, Context &ctx, const DiamondOptions &opt, bool allow_env) {
    CircuitSetup s;
    json rc = json::object();
    s.circuit = io::parse_circuit(f.take("circuit"), rc, "params.circuit");
    ctx.resolved_params["circuit"] = rc;
    if (allow_env && f.has("environment")) {
        if (f.has("noise")) {
            f.fail("give either 'noise' or 'environment', not both");
        }
        json re = json::object();
        s.env = io::parse_environment(f.take("environment"), re, s.circuit, "params.environment");
        ctx.resolved_params["environment"] = re;
        for (const auto &[_, n] : s.env->couplings) {
            s.epsilon = std::max(s.epsilon, strength_unitary_coupling(n));
        }
        return s;
    }
    json rn = json::array();
    s.noise = io::parse_noise_list(f.has("noise") ? f.take("noise") : json::array(), rn, s.circuit, "params.noise");
    ctx.resolved_params["noise"] = rn;
    s.noise_map = io::to_noise_map(s.noise);
    for (const auto &e : s.noise) {
        s.epsilon = std::max(s.epsilon, noise_strength(e.channel, opt));
    }
    return s;
}

inline CommandOutput cmd_accuracy(const json &params, Context &ctx) {
    io::Fields f(params, ctx.resolved_params, "params");
    const DiamondOptions opt = detail::diamond_options(f, ctx);
    CircuitSetup s = load_circuit_setup(f, ctx, opt, true);
    f.finish();
    const std::size_t L = s.circuit.size();
    CommandOutput out;
    Distribution noisy;
    const SimResult ideal = simulate_ideal(s.circuit);
    if (s.env) {
        noisy = simulate_with_environment(s.circuit, *s.env).outcomes;
    } else {
        noisy = simulate_noisy(s.circuit, s.noise_map).outcomes;
    }
    const double delta = kolmogorov_distance(noisy, ideal.outcomes);
    out.results["L"] = L;
    out.results["epsilon"] = s.epsilon;
    out.results["delta"] = delta;
    out.results["noise_model"] = s.env ? "environment" : "markovian";
    json bounds = json::object();
    bounds["linear"] = accuracy_bound(L, s.epsilon, BoundVariant::linear);
    bounds["non_markovian"] = accuracy_bound(L, s.epsilon, BoundVariant::non_markovian);
    if (L == 0 || s.epsilon <= 1.0 / static_cast<double>(L)) {
        bounds["e_minus_1"] = accuracy_bound(L, s.epsilon, BoundVariant::e_minus_1);
    } else {
        bounds["e_minus_1"] = nullptr;
    }
    out.results["bounds"] = bounds;
    const double applicable = s.env ? bounds["non_markovian"].get<double>() : bounds["linear"].get<double>();
    out.results["bound_holds"] = delta <= applicable + 1e-12;
    out.columns = {"outcome", "ideal", "noisy"};
    std::set<std::string> labels;
    for (const auto &[k, _] : ideal.outcomes.probs()) {
        labels.insert(k);
    }
    for (const auto &[k, _] : noisy.probs()) {
        labels.insert(k);
    }
    for (const auto &k : labels) {
        out.records.push_back({{"outcome", k}, {"ideal", ideal.outcomes[k]}, {"noisy", noisy[k]}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// faultpaths

inline CommandOutput cmd_faultpaths(const json &params, Context &ctx) {
    io::Fields f(params, ctx.resolved_params, "params");
    const DiamondOptions opt = detail::diamond_options(f, ctx);
    const auto max_order = static_cast<std::size_t>(f.integer("max_order", 2));
    const std::string conv_name = f.choice("convention", {"full_complement", "ideal_complement"}, "full_complement");
    const bool reconstruct = f.string("reconstruct", "auto") != "never";
    CircuitSetup s = load_circuit_setup(f, ctx, opt, false);
    f.finish();
    const std::size_t L = s.circuit.size();
    if (L > kMaxEnumLocations || max_order > kMaxEnumOrder) {
        throw CapExceeded("exhaustive fault-path enumeration is capped at 16 locations and order 4");
    }
    if (L == 0) {
        throw ValidationError("params.circuit: fault-path analysis needs at least one location");
    }
    if (max_order == 0) {
        throw ValidationError("params: 'max_order' must be at least 1");
    }
    const ZetaConvention conv =
        conv_name == "full_complement" ? ZetaConvention::full_complement : ZetaConvention::ideal_complement;
    CommandOutput out;
    out.columns = {"order", "subsets", "max_trace_norm", "epsilon_power", "holds"};
    for (std::size_t r = 1; r <= std::min(max_order, L); ++r) {
        const ZetaScan scan = scan_zeta(s.circuit, s.noise_map, r, conv, ctx.workers);
        const double bound = std::pow(s.epsilon, static_cast<double>(r));
        out.records.push_back({{"order", r},
                               {"subsets", scan.subsets},
                               {"max_trace_norm", scan.max_trace_norm},
                               {"epsilon_power", bound},
                               {"holds", scan.max_trace_norm <= bound + 1e-9},
                               {"argmax", scan.argmax}});
    }
    const Matrix faulty = faulty_part(s.circuit, s.noise_map);
    Matrix earliest_sum = Matrix::zeros(faulty.dims());
    json earliest = json::array();
    for (std::size_t r = 0; r < L; ++r) {
        const Matrix z = zeta_earliest(s.circuit, s.noise_map, r);
        earliest.push_back(trace_norm(z));
        earliest_sum += z;
    }
    out.results["L"] = L;
    out.results["epsilon"] = s.epsilon;
    out.results["convention"] = conv_name;
    out.results["earliest_trace_norms"] = earliest;
    out.results["earliest_reconstruction_error"] = (earliest_sum - faulty).max_abs();
    out.results["faulty_trace_norm"] = trace_norm(faulty);
    out.results["delta"] = accuracy_delta_exact(s.circuit, s.noise_map);
    if (reconstruct && L <= 12) {
        out.results["signed_reconstruction_error"] = (fault_path_sum(s.circuit, s.noise_map, conv) - faulty).max_abs();
    } else {
        out.results["signed_reconstruction_error"] = nullptr;
    }
    return out;
}

// ---------------------------------------------------------------------------
// truncate

inline CommandOutput cmd_truncate(const json &params, Context &ctx) {
    io::Fields f(params, ctx.resolved_params, "params");
    json rg = json::object();
    std::optional<std::size_t> graph_t;
    const GadgetGraph g = io::parse_gadget_graph(f.take("graph"), rg, "params.graph", &graph_t);
    ctx.resolved_params["graph"] = rg;
    std::size_t t = 0;
    if (f.has("t")) {
        t = static_cast<std::size_t>(f.integer("t"));
    } else if (graph_t) {
        t = *graph_t;
        ctx.resolved_params["t"] = t;
    } else {
        f.fail("missing required field 't' (in params or params.graph)");
    }
    CommandOutput out;
    out.results["total_locations"] = g.total_locations();
    out.results["t"] = t;
    if (f.has("faulty")) {
        const auto ids = f.index_list("faulty");
        for (std::size_t id : ids) {
            if (id >= g.total_locations()) {
                f.fail("fault location " + std::to_string(id) + " out of range");
            }
        }
        f.finish();
        const Classification c = truncate_and_classify(g, make_fault_config(g, ids), t);
        out.columns = {"gadget", "status", "faults", "truncated"};
        for (std::size_t p = 0; p < g.size(); ++p) {
            out.records.push_back({{"gadget", p},
                                   {"status", c.is_bad(p) ? "bad" : "good"},
                                   {"faults", c.faults[p]},
                                   {"truncated", c.truncated[p]}});
        }
        out.results["bad_count"] = c.bad_count();
        return out;
    }
    const double eps = f.number("eps");
    if (!(eps >= 0 && eps <= 1)) {
        f.fail("'eps' must lie in [0, 1]");
    }
    const auto samples = static_cast<std::size_t>(f.integer("samples"));
    if (samples == 0) {
        f.fail("'samples' must be at least 1");
    }
    f.finish();
    if (static_cast<double>(samples) * static_cast<double>(g.total_locations()) > kMaxLeafDraws) {
        throw CapExceeded("sampled truncation exceeds the 1e9 draw budget");
    }
    const std::uint64_t seed = ctx.require_seed("sampled truncation");
    const std::size_t chunks = chunk_count(samples);
    std::vector<std::vector<std::size_t>> bad(chunks, std::vector<std::size_t>(g.size(), 0));
    std::vector<std::size_t> partition_ok(chunks, 0);
    parallel_for(chunks, ctx.workers, [&](std::size_t c) {
        const std::size_t begin = c * kChunkSamples;
        const std::size_t end = std::min(samples, begin + kChunkSamples);
        for (std::size_t i = begin; i < end; ++i) {
            const FaultConfig fc = sample_fault_config(g, eps, derive_seed(seed, i));
            const Classification cl = truncate_and_classify(g, fc, t);
            std::vector<std::size_t> seen(g.total_locations(), 0);
            bool ok = true;
            for (std::size_t p = 0; p < g.size(); ++p) {
                bad[c][p] += cl.is_bad(p) ? 1 : 0;
                for (std::size_t id : cl.truncated[p]) {
                    ok = ok && ++seen[id] == 1;
                }
            }
            ok = ok && std::all_of(seen.begin(), seen.end(), [](std::size_t x) { return x == 1; });
            partition_ok[c] += ok ? 1 : 0;
        }
    });
    out.columns = {"gadget", "bad_fraction", "stderr"};
    const double n = static_cast<double>(samples);
    std::size_t ok_total = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        ok_total += partition_ok[c];
    }
    for (std::size_t p = 0; p < g.size(); ++p) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < chunks; ++c) {
            k += bad[c][p];
        }
        const double q = static_cast<double>(k) / n;
        out.records.push_back({{"gadget", p}, {"bad_fraction", q}, {"stderr", std::sqrt(q * (1 - q) / n)}});
    }
    out.results["samples"] = samples;
    out.results["partition_holds"] = ok_total == samples;
    return out;
}

// ---------------------------------------------------------------------------
// levelred

inline CommandOutput cmd_levelred(const json &params, Context &ctx) {
    io::Fields f(params, ctx.resolved_params, "params");
    const auto L0 = static_cast<std::size_t>(f.integer("L0"));
    const auto t = static_cast<std::size_t>(f.integer("t"));
    const double eps = f.number("eps");
    const auto levels = static_cast<std::size_t>(f.integer("levels"));
    const auto samples = static_cast<std::size_t>(f.integer("samples"));
    const std::string sampler = f.choice("sampler", {"importance", "plain"}, "importance");
    f.finish();
    if (t >= L0) {
        f.fail("'t' must be smaller than 'L0'");
    }
    if (!(eps >= 0 && eps <= 1)) {
        f.fail("'eps' must lie in [0, 1]");
    }
    if (levels == 0 || samples == 0) {
        f.fail("'levels' and 'samples' must be at least 1");
    }
    const std::uint64_t seed = ctx.require_seed("levelred");
    const auto est = level_reduce_mc(levels, L0, t, eps, samples, seed, ctx.workers,
                                     sampler == "plain" ? LevelSampler::plain : LevelSampler::importance);
    CommandOutput out;
    out.columns = {"level", "estimate", "stderr", "exact"};
    for (const auto &e : est) {
        out.records.push_back({{"level", e.level}, {"estimate", e.estimate}, {"stderr", e.stderr_}, {"exact", e.exact}});
    }
    out.results["leaf_draws_per_sample"] = std::pow(static_cast<double>(L0), static_cast<double>(levels));
    return out;
}

// ---------------------------------------------------------------------------
// threshold

inline CommandOutput cmd_threshold(const json &params, Context &ctx) {
    io::Fields f(params, ctx.resolved_params, "params");
    SchemeParams p;
    p.L0 = static_cast<std::size_t>(f.integer("L0"));
    p.t = static_cast<std::size_t>(f.integer("t"));
    p.xi = f.number("xi", std::numbers::e);
    try {
        p.validate();
    } catch (const std::invalid_argument &e) {
        f.fail(e.what());
    }
    const bool has_eps = f.has("eps");
    const double eps = has_eps ? f.number("eps") : 0.0;
    if (has_eps && !(eps >= 0)) {
        f.fail("'eps' must be non-negative");
    }
    const auto levels = static_cast<std::size_t>(f.integer("levels", 5));
    if (levels > kMaxLevel) {
        throw CapExceeded("at most 64 levels are reported");
    }
    const double L = f.number("L", 1e6);
    const double delta0 = f.number("delta0", 1e-3);
    if (!(L >= 1) || !(delta0 > 0 && delta0 < 1)) {
        f.fail("need L >= 1 and delta0 in (0, 1)");
    }
    const std::string pseudo = f.choice("pseudothreshold", {"none", "exact", "sampled"}, "exact");
    std::size_t samples = 0;
    if (pseudo == "sampled") {
        samples = static_cast<std::size_t>(f.integer("samples", 1000000));
        if (samples < 1000) {
            f.fail("'samples' must be at least 1000");
        }
    }
    f.finish();
    CommandOutput out;
    out.columns = {"level", "strength"};
    out.results["eps0"] = threshold_value(p);
    out.results["xi"] = p.xi;
    out.results["exponent_a"] = overhead_ratio(0, p).a;
    out.results["L0_convention"] = "single largest-gadget L0";
    if (has_eps) {
        const auto Lc = static_cast<std::size_t>(L);
        const ThresholdReport r = threshold_report(eps, levels, Lc, delta0, p);
        for (std::size_t k = 0; k < r.per_level.size(); ++k) {
            out.records.push_back({{"level", k}, {"strength", r.per_level[k]}});
        }
        out.results["below_threshold"] = r.below_threshold;
        if (r.k_required) {
            out.results["k_required"] = *r.k_required;
            out.results["overhead_ratio"] = r.overhead;
        } else {
            out.results["k_required"] = nullptr;
            out.results["overhead_ratio"] = nullptr;
        }
    }
    if (pseudo != "none") {
        Pseudothreshold ps;
        try {
            ps = pseudo == "exact" ? pseudothreshold_exact(p)
                                   : pseudothreshold_mc(p, samples, ctx.require_seed("the sampled pseudothreshold"), ctx.workers);
        } catch (const std::domain_error &e) {
            throw ValidationError(std::string("params: ") + e.what());
        }
        out.results["pseudothreshold"] = {{"mode", pseudo}, {"eps_star", ps.eps_star}, {"ci", {ps.ci_low, ps.ci_high}}};
    }
    return out;
}

// ---------------------------------------------------------------------------
// run

struct RunResult {
    int exit_code = kOk;
    std::string report;       // serialized report (empty on failure)
    std::string error;        // machine-readable error object (empty on success)
    std::optional<std::string> out_path;
};

inline std::string error_json(const std::string &code, const std::string &reason) {
    json e = {{"status", "error"}, {"code", code}, {"reason", reason}};
    if (code == "cap_exceeded") {
        e["suggestion"] = "reduce the problem size or samples, or use an exact mode (e.g. the exact iterated map)";
    }
    return e.dump() + "\n";
}

/// Validates and executes one config; nothing touches the filesystem.
inline RunResult execute(const std::string &command, const std::string &config_text, const Overrides &ov) {
    RunResult res;
    try {
        json cfg;
        try {
            cfg = json::parse(config_text);
        } catch (const json::parse_error &e) {
            throw ValidationError(std::string("config is not valid JSON: ") + e.what());
        }
        json resolved = json::object();
        io::Fields top(cfg, resolved, "config");
        if (top.has("$comment")) {
            top.take("$comment");
        }
        std::string cmd = command;
        if (top.has("command")) {
            const std::string c = top.string("command");
            if (!cmd.empty() && c != cmd) {
                top.fail("config is for command '" + c + "' but '" + cmd + "' was requested");
            }
            cmd = c;
        }
        if (std::find(commands().begin(), commands().end(), cmd) == commands().end()) {
            top.fail("unknown command '" + cmd + "'");
        }
        resolved["command"] = cmd;
        Context ctx;
        ctx.workers = std::max<std::size_t>(1, ov.workers);
        if (top.has("seed")) {
            ctx.seed = top.integer("seed");
        }
        if (ov.seed) {
            ctx.seed = ov.seed;
        }
        std::string format = "json";
        std::optional<std::string> path;
        if (top.has("output")) {
            json ro = json::object();
            io::Fields of(top.take("output"), ro, "config.output");
            if (of.has("path")) {
                path = of.string("path");
            }
            format = of.choice("format", {"json", "csv"}, "json");
            of.finish();
        }
        if (ov.format) {
            if (*ov.format != "json" && *ov.format != "csv") {
                throw ValidationError("--format must be json or csv");
            }
            format = *ov.format;
        }
        if (ov.out) {
            path = ov.out;
        }
        const json &params = top.has("params") ? top.take("params") : json::object();
        top.finish();

        CommandOutput out;
        if (cmd == "strength") {
            out = cmd_strength(params, ctx);
        } else if (cmd == "accuracy") {
            out = cmd_accuracy(params, ctx);
        } else if (cmd == "faultpaths") {
            out = cmd_faultpaths(params, ctx);
        } else if (cmd == "truncate") {
            out = cmd_truncate(params, ctx);
        } else if (cmd == "levelred") {
            out = cmd_levelred(params, ctx);
        } else {
            out = cmd_threshold(params, ctx);
        }
        resolved["params"] = ctx.resolved_params;
        resolved["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
        resolved["output"] = {{"format", format}, {"path", path ? json(*path) : json(nullptr)}};
        if (format == "json") {
            json report = {{"command", cmd},
                           {"config", resolved},
                           {"results", out.results},
                           {"records", out.records},
                           {"status", "ok"},
                           {"tool", {{"name", "ftlab"}, {"version", kVersion}}}};
            res.report = io::to_json_text(report);
        } else {
            res.report = io::to_csv_text(out.columns, out.records);
        }
        res.out_path = path;
    } catch (const CapExceeded &e) {
        res = RunResult{kRefused, "", error_json("cap_exceeded", e.what()), std::nullopt};
    } catch (const std::invalid_argument &e) {
        res = RunResult{kInvalid, "", error_json("validation_error", e.what()), std::nullopt};
    } catch (const std::domain_error &e) {
        res = RunResult{kInvalid, "", error_json("validation_error", e.what()), std::nullopt};
    } catch (const std::exception &e) {
        res = RunResult{kInternal, "", error_json("internal_error", e.what()), std::nullopt};
    }
    return res;
}

/// Writes `text` to a sibling temporary file and renames it over `path`.
inline void write_atomically(const std::string &path, const std::string &text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        os << text;
        os.flush();
        if (!os) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move report into place: " + ec.message());
    }
}

/// Reads the config file, executes, and writes the report to its path (or
/// `out` when no path is set). Errors go to `err` as one JSON line.
inline int run(const std::string &command, const std::string &config_path, const Overrides &ov, std::ostream &out,
               std::ostream &err) {
    std::ifstream is(config_path, std::ios::binary);
    if (!is) {
        err << error_json("validation_error", "cannot read config file '" + config_path + "'");
        return kInvalid;
    }
    std::stringstream buf;
    buf << is.rdbuf();
    RunResult r = execute(command, buf.str(), ov);
    if (r.exit_code != kOk) {
        err << r.error;
        return r.exit_code;
    }
    if (r.out_path) {
        try {
            write_atomically(*r.out_path, r.report);
        } catch (const std::exception &e) {
            err << error_json("io_error", e.what());
            return kInternal;
        }
    } else {
        out << r.report;
    }
    return kOk;
}

}  // namespace ftlab::cli

#endif  // FTLAB_CLI_HPP
