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

// Acceptance driver: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "ftlab/ftlab.hpp"
#include "support.hpp"

namespace {

using namespace ftlab;
using testing::pick;
using testing::random_instance;
using testing::random_unitary;
using testing::uniform;

struct Outcome {
    bool pass = true;
    std::string detail;
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// Largest per-location strength, each location judged against its own ideal
// operation.
double markovian_epsilon(const Circuit &c, const NoiseMap &noise) {
    double eps = 0;
    for (const auto &[j, n] : noise) {
        const Location &l = c.locations[j];
        double e = 0;
        if (const auto *g = std::get_if<Gate>(&l.op)) {
            const Channel ideal = unitary_channel(g->unitary).at(l.support);
            e = strength_markovian(compose_channels(n, ideal), ideal);
        } else if (std::holds_alternative<Idle>(l.op)) {
            const Channel ideal = identity_channel(SubsystemDims::qubits(l.support.size())).at(l.support);
            e = strength_markovian(compose_channels(n, ideal), ideal);
        } else {
            Channel ideal = identity_channel({2});
            if (const auto *p = std::get_if<Prep>(&l.op)) {
                ideal = preparation_channel({2}, p->state).at(l.support);
            } else {
                ideal = measurement_channel(std::get<Measure>(l.op).projectors).at(l.support);
            }
            e = strength_markovian(compose_channels(n, ideal), ideal, StrengthMode::direct);
        }
        eps = std::max(eps, e);
    }
    return eps;
}

Outcome markovian_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20261);
    std::size_t violations = 0;
    double worst = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const auto inst = random_instance(rng, 4, 8, 0.2);
        const double eps = markovian_epsilon(inst.circuit, inst.noise);
        const double delta = accuracy_delta_exact(inst.circuit, inst.noise);
        const double bound = static_cast<double>(inst.circuit.size()) * eps;
        violations += delta > bound + 1e-12 ? 1 : 0;
        if (bound > 0) {
            worst = std::max(worst, delta / bound);
        }
    }
    const double secs = elapsed_since(t0);
    return {violations == 0 && secs < 120,
            fmt("%d circuits, %zu violations, max delta/(L eps) = %.4f, %.1f s", n, violations, worst, secs)};
}

struct EnvInstance {
    Circuit circuit;
    EnvironmentSpec env;
};

EnvInstance random_env_instance(Rng &rng) {
    EnvInstance inst;
    Circuit &c = inst.circuit;
    c.n_system = 1 + pick(rng, 3);
    inst.env.n_env = 1 + pick(rng, 2);
    inst.env.initial = testing::random_state(std::size_t{1} << inst.env.n_env, rng);
    const std::size_t L = 1 + pick(rng, 5);
    for (std::size_t j = 0; j < L; ++j) {
        const std::size_t q = pick(rng, c.n_system);
        if (j == 0 && pick(rng, 2) == 0) {
            c.locations.push_back(loc::prep(j, q, testing::random_state(2, rng)));
        } else if (c.n_system > 1 && pick(rng, 3) == 0) {
            std::size_t q2 = pick(rng, c.n_system - 1);
            q2 += q2 >= q ? 1 : 0;
            c.locations.push_back(loc::gate(j, gates::CNOT(), {q, q2}));
        } else if (pick(rng, 4) == 0) {
            c.locations.push_back(loc::idle(j, {q}));
        } else {
            c.locations.push_back(loc::gate(j, random_unitary({2}, rng), {q}));
        }
        const std::size_t k = c.locations[j].support.size() + inst.env.n_env;
        Matrix g = testing::random_hermitian(SubsystemDims::qubits(k), rng);
        g = g * cplx(1.0 / operator_norm(g));
        inst.env.couplings.emplace(j, gates::expi_hermitian(g, uniform(rng, 0.0, 0.1)));
    }
    c.final_measure = measure_all_z(c.n_system);
    return inst;
}

Outcome non_markovian_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20262);
    std::size_t violations = 0;
    double worst = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
        const EnvInstance inst = random_env_instance(rng);
        double eps = 0;
        for (const auto &[_, u] : inst.env.couplings) {
            eps = std::max(eps, strength_unitary_coupling(u));
        }
        const double delta = accuracy_delta_exact(inst.circuit, inst.env);
        const double bound = accuracy_bound(inst.circuit.size(), eps, BoundVariant::non_markovian);
        violations += delta > bound + 1e-12 ? 1 : 0;
        if (bound > 0) {
            worst = std::max(worst, delta / bound);
        }
    }
    const double secs = elapsed_since(t0);
    return {violations == 0 && secs < 300,
            fmt("%d circuits, %zu violations, max delta/(2 L eps) = %.4f, %.1f s", n, violations, worst, secs)};
}

Outcome fault_path_exactness() {
    Rng rng(20263);
    double earliest_err = 0;
    double signed_err = 0;
    const int n = 100;
    for (int i = 0; i < n; ++i) {
        const auto inst = random_instance(rng, 3, 5, 0.3);
        const Matrix noisy = simulate_noisy(inst.circuit, inst.noise).state;
        Matrix sum = simulate_ideal(inst.circuit).state;
        for (std::size_t r = 0; r < inst.circuit.size(); ++r) {
            sum += zeta_earliest(inst.circuit, inst.noise, r);
        }
        earliest_err = std::max(earliest_err, (sum - noisy).max_abs());
        const Matrix fp = faulty_part(inst.circuit, inst.noise);
        for (auto conv : {ZetaConvention::full_complement, ZetaConvention::ideal_complement}) {
            signed_err = std::max(signed_err, (fault_path_sum(inst.circuit, inst.noise, conv) - fp).max_abs());
        }
    }
    return {earliest_err <= 1e-10 && signed_err <= 1e-9,
            fmt("%d instances, earliest-fault error %.2e, signed IE error %.2e", n, earliest_err, signed_err)};
}

Outcome ie_identities() {
    std::size_t checked = 0;
    std::string failure;
    for (std::size_t L0 = 1; L0 <= 8; ++L0) {
        for (std::size_t t = 0; t <= std::min<std::size_t>(2, L0 - 1); ++t) {
            const IeCheck r = verify_ie_identity(L0, t);
            ++checked;
            if (!r.ok && failure.empty()) {
                failure = fmt(", identity failed at L0=%zu t=%zu", L0, t);
            }
        }
    }
    std::size_t mismatches = 0;
    for (std::size_t t = 0; t <= 3; ++t) {
        const auto oracle = testing::ie_multiplicity_oracle(10, t);
        for (std::size_t s = t + 1; s <= 10; ++s) {
            mismatches += ie_coefficient(s, t).value != oracle[s] ? 1 : 0;
        }
    }
    return {failure.empty() && mismatches == 0,
            fmt("%zu (L0, t) pairs exhaustive, %zu coefficient mismatches", checked, mismatches) + failure};
}

Outcome truncation() {
    std::size_t graphs = 0;
    std::size_t configs = 0;
    std::size_t partition_failures = 0;
    std::size_t min_failures = 0;
    for (std::size_t t = 1; t <= 2; ++t) {
        for (std::size_t own0 = 1; own0 <= 10; ++own0) {
            for (std::size_t shared = 1; own0 + shared + 1 <= 12; ++shared) {
                for (std::size_t own1 = 1; own0 + shared + own1 <= 12; ++own1) {
                    const GadgetGraph g = GadgetGraph::chain2(own0, shared, own1);
                    const std::size_t L = g.total_locations();
                    std::size_t min_double = L + 1;
                    ++graphs;
                    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L); ++mask) {
                        const FaultConfig f = fault_config_from_mask(mask);
                        const Classification c = truncate_and_classify(g, f, t);
                        ++configs;
                        std::vector<int> seen(L, 0);
                        bool ok = true;
                        for (std::size_t p = 0; p < g.size(); ++p) {
                            std::size_t faults = 0;
                            for (std::size_t id : c.truncated[p]) {
                                ++seen[id];
                                faults += (mask >> id) & 1U;
                            }
                            ok = ok && faults == c.faults[p] && c.is_bad(p) == (faults > t);
                        }
                        for (int s : seen) {
                            ok = ok && s == 1;
                        }
                        partition_failures += ok ? 0 : 1;
                        if (c.bad_count() == 2) {
                            min_double = std::min(min_double, f.faulty.size());
                        }
                    }
                    const bool both_can_fail = own0 > t && shared + own1 > t;
                    const std::size_t want = both_can_fail ? 2 * (t + 1) : L + 1;
                    min_failures += min_double == want ? 0 : 1;
                }
            }
        }
    }
    return {partition_failures == 0 && min_failures == 0,
            fmt("%zu chains, %zu configs, %zu partition failures, %zu minimum-count failures", graphs, configs,
                partition_failures, min_failures)};
}

Outcome binomial_bound() {
    std::size_t points = 0;
    std::size_t violations = 0;
    for (std::size_t L0 = 5; L0 <= 20; ++L0) {
        for (std::size_t t = 1; t <= 3; ++t) {
            for (int i = 0; i <= 40; ++i) {
                const double eps = std::pow(10.0, -3.0 + 2.0 * i / 40.0);
                const double exact = level1_failure_exact(L0, t, eps);
                const double bound = static_cast<double>(binomial(L0, t + 1)) * std::pow(eps, static_cast<double>(t + 1)) *
                                     std::exp(static_cast<double>(L0 - t - 1) * eps);
                ++points;
                violations += exact > bound * (1 + 1e-12) ? 1 : 0;
            }
        }
    }
    return {violations == 0, fmt("%zu grid points, %zu violations", points, violations)};
}

Outcome level_reduction() {
    const std::size_t samples = 100000;
    const SchemeParams scheme{5, 1};
    const double crossing = pseudothreshold_exact(scheme).eps_star;
    double worst_sigma = 0;
    std::string trend;
    bool ok = true;
    for (double eps : {0.005, 0.05, 0.3}) {
        const auto est = level_reduce_mc(3, 5, 1, eps, samples, 2026);
        double prev = eps;
        bool decreasing = true;
        for (const auto &e : est) {
            const double sigma = e.stderr_ > 0 ? std::abs(e.estimate - e.exact) / e.stderr_ : 0.0;
            worst_sigma = std::max(worst_sigma, sigma);
            ok = ok && std::abs(e.estimate - e.exact) <= 4 * e.stderr_;
            decreasing = decreasing && e.estimate < prev;
            prev = e.estimate;
        }
        const bool below = eps < crossing;
        ok = ok && decreasing == below;
        trend += fmt(" eps=%g:%s", eps, decreasing ? "decreasing" : "not-decreasing");
    }
    return {ok, fmt("crossing %.6f, max |est-exact|/stderr = %.2f,", crossing, worst_sigma) + trend};
}

Outcome threshold_arithmetic() {
    const SchemeParams p{100, 1, std::numbers::e};
    const double want = 1.0 / (std::numbers::e * 4950.0);
    const double rel = std::abs(threshold_value(p) - want) / want;
    double worst_level = 0;
    for (const SchemeParams &q : {p, SchemeParams{7, 1}, SchemeParams{20, 2}, SchemeParams{30, 3, 1.5}}) {
        const double e0 = threshold_value(q);
        for (double frac : {0.1, 0.5, 0.9, 0.99}) {
            double iter = frac * e0;
            for (std::size_t k = 1; k <= 10; ++k) {
                iter = renormalize_strength(iter, q);
                const double closed = strength_at_level(frac * e0, k, q);
                if (iter > 1e-300 && closed > 1e-300) {
                    worst_level = std::max(worst_level, std::abs(closed - iter) / iter);
                }
            }
        }
    }
    std::size_t grid = 0;
    std::size_t bad = 0;
    const double e0 = threshold_value(p);
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 4; ++b) {
            for (int c = 0; c < 5; ++c) {
                const auto L = static_cast<std::size_t>(std::pow(10.0, 2 + a));
                const double delta0 = std::pow(10.0, -1.0 - b);
                const double eps = e0 * (0.05 + 0.2 * c);
                const std::size_t k = required_level(L, delta0, eps, p);
                ++grid;
                const bool meets = meets_target(L, delta0, eps, k, p) && meets_target_log_form(L, delta0, eps, k, p);
                const bool prev_fails = k == 0 || (!meets_target(L, delta0, eps, k - 1, p) &&
                                                   !meets_target_log_form(L, delta0, eps, k - 1, p));
                bad += meets && prev_fails ? 0 : 1;
            }
        }
    }
    return {rel <= 1e-12 && worst_level <= 1e-9 && bad == 0,
            fmt("threshold rel. error %.2e, k-fold rel. error %.2e, %zu-point level grid with %zu failures", rel,
                worst_level, grid, bad)};
}

Outcome diamond_oracle() {
    bool ok = true;
    std::string detail;
    for (double p : {0.02, 0.1, 0.3}) {
        const Channel n = make_noise_channel(Probabilistic{p, gates::X()});
        const DiamondBounds b = diamond_distance(n, identity_channel({2}));
        ok = ok && b.lower <= 2 * p + 1e-12 && 2 * p <= b.upper + 1e-12 && b.upper - b.lower <= 1e-4;
        detail += fmt("p=%g:[%.12f, %.12f] ", p, b.lower, b.upper);
    }
    const DiamondBounds id = diamond_distance(identity_channel({2}), identity_channel({2}));
    ok = ok && id.lower == 0.0 && id.upper == 0.0;
    return {ok, detail + fmt("identity:[%g, %g]", id.lower, id.upper)};
}

Outcome determinism() {
    std::size_t configs = 0;
    std::size_t mismatches = 0;
    std::vector<std::filesystem::path> paths;
    for (const auto &entry : std::filesystem::directory_iterator(FTLAB_CONFIG_DIR)) {
        paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto &path : paths) {
        std::ifstream is(path, std::ios::binary);
        std::stringstream buf;
        buf << is.rdbuf();
        const json cfg = json::parse(buf.str());
        if (!cfg.contains("seed")) {
            continue;
        }
        for (const char *format : {"json", "csv"}) {
            cli::Overrides one;
            one.format = format;
            cli::Overrides eight = one;
            eight.workers = 8;
            const auto a = cli::execute("", buf.str(), one);
            const auto b = cli::execute("", buf.str(), one);
            const auto c = cli::execute("", buf.str(), one);
            const auto d = cli::execute("", buf.str(), eight);
            const bool same = a.exit_code == b.exit_code && a.exit_code == c.exit_code && a.exit_code == d.exit_code &&
                              a.report == b.report && a.report == c.report && a.report == d.report &&
                              a.error == d.error;
            mismatches += same ? 0 : 1;
        }
        ++configs;
    }
    return {configs > 0 && mismatches == 0,
            fmt("%zu seeded configs x {json, csv}, 3 runs + 8 workers, %zu mismatches", configs, mismatches)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"markovian accuracy bound", markovian_bound},
        {"non-markovian accuracy bound", non_markovian_bound},
        {"fault-path exactness", fault_path_exactness},
        {"inclusion-exclusion identities", ie_identities},
        {"truncation on two-gadget chains", truncation},
        {"binomial level-1 bound", binomial_bound},
        {"level reduction vs exact map", level_reduction},
        {"threshold arithmetic", threshold_arithmetic},
        {"diamond-distance oracle", diamond_oracle},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
