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

#ifndef FTLAB_GADGETS_HPP
#define FTLAB_GADGETS_HPP

/// \file gadgets.hpp
/// Abstract extended gadgets, truncation, and level-1 / level-k failure
/// probabilities under iid faults.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftlab/matcore.hpp"
#include "ftlab/parallel.hpp"

namespace ftlab {

/// Error-recovery segment shared by a gadget and a later gadget `to`.
struct ErSegment {
    std::size_t count = 1;
    std::size_t to = 0;
};

struct GadgetSpec {
    std::size_t own_locations = 0;
    std::vector<ErSegment> er_out;
};

/// Extended gadgets in time order. Location ids: every gadget's own
/// locations in gadget order, then every segment's locations in the order the
/// segments are listed. A gadget's extended extent is its own locations plus
/// the segments leading into and out of it.
class GadgetGraph {
public:
    struct Segment {
        std::size_t from = 0;
        std::size_t to = 0;
        std::size_t first = 0;  // first location id
        std::size_t count = 0;
    };

    GadgetGraph() = default;
    explicit GadgetGraph(std::vector<GadgetSpec> gadgets) : specs_(std::move(gadgets)) {
        const std::size_t n = specs_.size();
        if (n == 0) {
            throw std::invalid_argument("gadget graph has no gadgets");
        }
        own_first_.resize(n);
        std::size_t next = 0;
        for (std::size_t g = 0; g < n; ++g) {
            own_first_[g] = next;
            next += specs_[g].own_locations;
        }
        leading_.resize(n);
        trailing_.resize(n);
        for (std::size_t g = 0; g < n; ++g) {
            for (const auto &e : specs_[g].er_out) {
                if (e.to >= n) {
                    throw std::invalid_argument("segment of gadget " + std::to_string(g) + " points to missing gadget " +
                                                std::to_string(e.to));
                }
                if (e.to <= g) {
                    throw std::invalid_argument("segment of gadget " + std::to_string(g) +
                                                " must point to a later gadget (time order)");
                }
                if (e.count == 0) {
                    throw std::invalid_argument("segment of gadget " + std::to_string(g) + " has no locations");
                }
                trailing_[g].push_back(segments_.size());
                leading_[e.to].push_back(segments_.size());
                segments_.push_back({g, e.to, next, e.count});
                next += e.count;
            }
        }
        total_ = next;
        check_series_parallel();
    }

    std::size_t size() const { return specs_.size(); }
    std::size_t total_locations() const { return total_; }
    const std::vector<GadgetSpec> &specs() const { return specs_; }
    const std::vector<Segment> &segments() const { return segments_; }
    const std::vector<std::size_t> &leading(std::size_t g) const { return leading_.at(g); }
    const std::vector<std::size_t> &trailing(std::size_t g) const { return trailing_.at(g); }
    std::size_t own_first(std::size_t g) const { return own_first_.at(g); }

    /// Largest extended-gadget size (the L0 used by the closed-form bounds).
    std::size_t max_extended_size() const {
        std::size_t best = 0;
        for (std::size_t g = 0; g < size(); ++g) {
            std::size_t s = specs_[g].own_locations;
            for (std::size_t i : leading_[g]) {
                s += segments_[i].count;
            }
            for (std::size_t i : trailing_[g]) {
                s += segments_[i].count;
            }
            best = std::max(best, s);
        }
        return best;
    }

    /// Two gadgets sharing one segment: g0 (own0) -> g1 (own1).
    static GadgetGraph chain2(std::size_t own0, std::size_t shared, std::size_t own1) {
        return GadgetGraph({{own0, {{shared, 1}}}, {own1, {}}});
    }

    static GadgetGraph chain(const std::vector<std::size_t> &own, std::size_t shared) {
        std::vector<GadgetSpec> specs;
        for (std::size_t g = 0; g < own.size(); ++g) {
            GadgetSpec s{own[g], {}};
            if (g + 1 < own.size()) {
                s.er_out.push_back({shared, g + 1});
            }
            specs.push_back(std::move(s));
        }
        return GadgetGraph(std::move(specs));
    }

private:
    // Accepts a single gadget, or a two-terminal series-parallel DAG.
    void check_series_parallel() const {
        const std::size_t n = specs_.size();
        if (n == 1) {
            return;
        }
        std::map<std::pair<std::size_t, std::size_t>, int> edges;
        for (const auto &s : segments_) {
            edges[{s.from, s.to}] = 1;  // parallel reduction
        }
        std::vector<std::size_t> indeg(n, 0);
        std::vector<std::size_t> outdeg(n, 0);
        for (const auto &[e, _] : edges) {
            ++outdeg[e.first];
            ++indeg[e.second];
        }
        std::size_t source = n;
        std::size_t sink = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (indeg[v] == 0) {
                if (source != n) {
                    throw std::invalid_argument("gadget graph must have a single earliest gadget");
                }
                source = v;
            }
            if (outdeg[v] == 0) {
                if (sink != n) {
                    throw std::invalid_argument("gadget graph must have a single latest gadget");
                }
                sink = v;
            }
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t v = 0; v < n && !changed; ++v) {
                if (v == source || v == sink) {
                    continue;
                }
                std::vector<std::size_t> in;
                std::vector<std::size_t> out;
                for (const auto &[e, _] : edges) {
                    if (e.second == v) {
                        in.push_back(e.first);
                    }
                    if (e.first == v) {
                        out.push_back(e.second);
                    }
                }
                if (in.size() == 1 && out.size() == 1) {
                    edges.erase({in[0], v});
                    edges.erase({v, out[0]});
                    edges[{in[0], out[0]}] = 1;
                    changed = true;
                }
            }
        }
        if (edges.size() != 1 || edges.begin()->first != std::make_pair(source, sink)) {
            throw std::invalid_argument("gadget graph is not series-parallel; general segment sharing is unsupported");
        }
    }

    std::vector<GadgetSpec> specs_;
    std::vector<std::size_t> own_first_;
    std::vector<Segment> segments_;
    std::vector<std::vector<std::size_t>> leading_;
    std::vector<std::vector<std::size_t>> trailing_;
    std::size_t total_ = 0;
};

struct FaultConfig {
    std::vector<std::size_t> faulty;  // sorted, unique
};

inline FaultConfig make_fault_config(const GadgetGraph &g, std::vector<std::size_t> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (!ids.empty() && ids.back() >= g.total_locations()) {
        throw std::invalid_argument("fault location id " + std::to_string(ids.back()) + " out of range");
    }
    return {std::move(ids)};
}

inline FaultConfig fault_config_from_mask(std::uint64_t mask) {
    FaultConfig f;
    for (std::size_t j = 0; mask != 0; ++j, mask >>= 1) {
        if (mask & 1U) {
            f.faulty.push_back(j);
        }
    }
    return f;
}

enum class GadgetStatus { good, bad };

struct Classification {
    std::vector<GadgetStatus> status;
    std::vector<std::vector<std::size_t>> truncated;  // location ids per gadget
    std::vector<std::size_t> faults;                  // faults inside each truncated set

    std::size_t bad_count() const {
        return static_cast<std::size_t>(std::count(status.begin(), status.end(), GadgetStatus::bad));
    }
    bool is_bad(std::size_t g) const { return status.at(g) == GadgetStatus::bad; }
};

inline FaultConfig sample_fault_config(const GadgetGraph &g, double eps, std::uint64_t seed) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("fault probability must lie in [0, 1]");
    }
    Rng rng(derive_seed(seed, 0));
    FaultConfig f;
    for (std::size_t j = 0; j < g.total_locations(); ++j) {
        if (uniform01(rng) < eps) {
            f.faulty.push_back(j);
        }
    }
    return f;
}

/// Backward sweep over gadgets in reverse time order. A gadget is bad when
/// its leading segments, own locations and the segments it shares with
/// not-bad successors hold more than t faults. A segment between p and a
/// later s stays with p when p is bad and s is good, otherwise it belongs to
/// s. The resulting truncated sets partition all locations; each good set
/// holds at most t faults and each bad set more than t.
inline Classification truncate_and_classify(const GadgetGraph &g, const FaultConfig &f, std::size_t t) {
    std::vector<char> faulty(g.total_locations(), 0);
    for (std::size_t id : f.faulty) {
        if (id >= g.total_locations()) {
            throw std::invalid_argument("fault location id " + std::to_string(id) + " out of range");
        }
        faulty[id] = 1;
    }
    const auto &segs = g.segments();
    std::vector<std::size_t> seg_faults(segs.size(), 0);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t k = 0; k < segs[i].count; ++k) {
            seg_faults[i] += static_cast<std::size_t>(faulty[segs[i].first + k]);
        }
    }
    const std::size_t n = g.size();
    Classification out;
    out.status.assign(n, GadgetStatus::good);
    for (std::size_t p = n; p-- > 0;) {
        std::size_t count = 0;
        for (std::size_t k = 0; k < g.specs()[p].own_locations; ++k) {
            count += static_cast<std::size_t>(faulty[g.own_first(p) + k]);
        }
        for (std::size_t i : g.leading(p)) {
            count += seg_faults[i];
        }
        for (std::size_t i : g.trailing(p)) {
            if (out.status[segs[i].to] == GadgetStatus::good) {
                count += seg_faults[i];
            }
        }
        out.status[p] = count > t ? GadgetStatus::bad : GadgetStatus::good;
    }
    out.truncated.assign(n, {});
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t k = 0; k < g.specs()[p].own_locations; ++k) {
            out.truncated[p].push_back(g.own_first(p) + k);
        }
    }
    for (const auto &s : segs) {
        const bool to_from = out.status[s.from] == GadgetStatus::bad && out.status[s.to] == GadgetStatus::good;
        auto &dst = out.truncated[to_from ? s.from : s.to];
        for (std::size_t k = 0; k < s.count; ++k) {
            dst.push_back(s.first + k);
        }
    }
    out.faults.assign(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        std::sort(out.truncated[p].begin(), out.truncated[p].end());
        for (std::size_t id : out.truncated[p]) {
            out.faults[p] += static_cast<std::size_t>(faulty[id]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Failure probabilities

inline void check_tail_args(std::size_t L0, std::size_t t, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("fault probability must lie in [0, 1]");
    }
    if (t >= L0) {
        throw std::invalid_argument("t must be smaller than L0");
    }
}

/// P[Bin(L0, eps) > t].
inline double level1_failure_exact(std::size_t L0, std::size_t t, double eps) {
    check_tail_args(L0, t, eps);
    if (eps == 0.0) {
        return 0.0;
    }
    if (eps == 1.0) {
        return 1.0;
    }
    const double n = static_cast<double>(L0);
    const double le = std::log(eps);
    const double lq = std::log1p(-eps);
    double sum = 0.0;
    for (std::size_t j = L0 + 1; j-- > t + 1;) {  // small terms first
        const double k = static_cast<double>(j);
        sum += std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) + k * le + (n - k) * lq);
    }
    return std::min(sum, 1.0);
}

struct Estimate {
    double value = 0;
    double stderr_ = 0;
};

inline constexpr std::size_t kChunkSamples = 4096;

inline std::size_t chunk_count(std::size_t samples) { return (samples + kChunkSamples - 1) / kChunkSamples; }

/// Fraction of iid configurations on L0 locations with more than t faults.
inline Estimate level1_failure_mc(std::size_t L0, std::size_t t, double eps, std::size_t samples, std::uint64_t seed,
                                  std::size_t workers = 1) {
    check_tail_args(L0, t, eps);
    if (samples == 0) {
        throw std::invalid_argument("samples must be at least 1");
    }
    const std::size_t chunks = chunk_count(samples);
    std::vector<std::size_t> fails(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t c) {
        Rng rng(derive_seed(seed, c));
        const std::size_t begin = c * kChunkSamples;
        const std::size_t end = std::min(samples, begin + kChunkSamples);
        std::size_t k = 0;
        for (std::size_t s = begin; s < end; ++s) {
            std::size_t faults = 0;
            for (std::size_t j = 0; j < L0; ++j) {
                faults += uniform01(rng) < eps ? 1 : 0;
            }
            k += faults > t ? 1 : 0;
        }
        fails[c] = k;
    });
    std::size_t total = 0;
    for (std::size_t k : fails) {
        total += k;
    }
    const double n = static_cast<double>(samples);
    const double p = static_cast<double>(total) / n;
    return {p, std::sqrt(p * (1 - p) / n)};
}

/// p_l = P[Bin(L0, p_{l-1}) > t], p_0 = eps, for l = 1..levels.
inline std::vector<double> exact_level_map(std::size_t levels, std::size_t L0, std::size_t t, double eps) {
    std::vector<double> out;
    double p = eps;
    for (std::size_t l = 0; l < levels; ++l) {
        p = level1_failure_exact(L0, t, p);
        out.push_back(p);
    }
    return out;
}

enum class LevelSampler {
    importance,  // recursive failure-targeting proposal with a defensive mixture
    plain,       // direct simulation of the gadget tree
};

inline constexpr double kMaxLeafDraws = 1e9;

struct LevelEstimate {
    std::size_t level = 0;
    double estimate = 0;
    double stderr_ = 0;
    double exact = 0;  // iterated binomial map
};

namespace detail {

/// Outcome of one sampled level-l gadget tree.
struct TreeDraw {
    bool failed = false;
    double log_ratio = 0;  // log(proposal / nominal); -inf when impossible under the proposal
};

class TreeSampler {
public:
    TreeSampler(std::size_t L0, std::size_t t, double eps)
        : L0_(L0), t_(t), eps_(eps), log_inv_eps_(-std::log(eps)), log_choose_(std::log(static_cast<double>(choose(L0, t + 1)))) {}

    /// Draws a tree of depth `level`; `designated` selects the targeting proposal.
    TreeDraw draw(std::size_t level, bool designated, Rng &rng) const {
        if (level == 0) {
            const bool fault = designated ? true : uniform01(rng) < eps_;
            return {fault, fault ? log_inv_eps_ : -std::numeric_limits<double>::infinity()};
        }
        std::vector<char> pick(L0_, 0);
        if (designated) {
            // t+1 children chosen uniformly (partial Fisher-Yates)
            std::vector<std::size_t> idx(L0_);
            for (std::size_t i = 0; i < L0_; ++i) {
                idx[i] = i;
            }
            for (std::size_t i = 0; i <= t_; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(L0_ - i));
                std::swap(idx[i], idx[std::min(j, L0_ - 1)]);
                pick[idx[i]] = 1;
            }
        }
        std::size_t fails = 0;
        std::vector<double> lr(L0_);
        for (std::size_t i = 0; i < L0_; ++i) {
            const TreeDraw c = draw(level - 1, pick[i] != 0, rng);
            fails += c.failed ? 1 : 0;
            lr[i] = c.log_ratio;
        }
        return {fails > t_, log_elementary_symmetric(lr, t_ + 1) - log_choose_};
    }

    /// Plain simulation, no ratios.
    bool draw_plain(std::size_t level, Rng &rng) const {
        if (level == 0) {
            return uniform01(rng) < eps_;
        }
        std::size_t fails = 0;
        for (std::size_t i = 0; i < L0_; ++i) {
            fails += draw_plain(level - 1, rng) ? 1 : 0;
        }
        return fails > t_;
    }

    static std::uint64_t choose(std::size_t n, std::size_t k) {
        long double r = 1;
        for (std::size_t i = 1; i <= k; ++i) {
            r = r * static_cast<long double>(n - k + i) / static_cast<long double>(i);
        }
        return static_cast<std::uint64_t>(std::llround(r));
    }

    /// log e_k(exp(lr_1), ..., exp(lr_n)) with the largest term factored out.
    static double log_elementary_symmetric(const std::vector<double> &lr, std::size_t k) {
        double m = -std::numeric_limits<double>::infinity();
        for (double v : lr) {
            m = std::max(m, v);
        }
        if (m == -std::numeric_limits<double>::infinity()) {
            return m;
        }
        std::vector<double> e(k + 1, 0.0);
        e[0] = 1.0;
        for (double v : lr) {
            const double x = std::exp(v - m);
            for (std::size_t j = k; j >= 1; --j) {
                e[j] += x * e[j - 1];
            }
        }
        if (e[k] <= 0) {
            return -std::numeric_limits<double>::infinity();
        }
        return std::log(e[k]) + static_cast<double>(k) * m;
    }

private:
    std::size_t L0_;
    std::size_t t_;
    double eps_;
    double log_inv_eps_;
    double log_choose_;
};

}  // namespace detail

inline constexpr double kDefensiveWeight = 0.5;

/// Per-level failure estimates for concatenated gadgets: a level-l gadget
/// fails iff more than t of its L0 level-(l-1) sub-gadgets fail and a leaf
/// fails with probability eps. Each level uses its own `samples` trees.
///
/// The importance sampler draws from a mixture of the nominal law and a
/// proposal that forces t+1 random children of every targeted node to be
/// targeted in turn, and reweights by the exact likelihood ratio. It is
/// unbiased and keeps the relative error bounded deep below threshold, where
/// plain sampling sees no failures at all.
inline std::vector<LevelEstimate> level_reduce_mc(std::size_t levels, std::size_t L0, std::size_t t, double eps,
                                                  std::size_t samples, std::uint64_t seed, std::size_t workers = 1,
                                                  LevelSampler sampler = LevelSampler::importance) {
    check_tail_args(L0, t, eps);
    if (levels == 0) {
        throw std::invalid_argument("levels must be at least 1");
    }
    if (samples == 0) {
        throw std::invalid_argument("samples must be at least 1");
    }
    const double draws = static_cast<double>(samples) * std::pow(static_cast<double>(L0), static_cast<double>(levels));
    if (draws > kMaxLeafDraws) {
        throw CapExceeded("level reduction needs " + std::to_string(draws) +
                          " leaf draws, above the 1e9 budget; use the exact iterated map instead");
    }
    const std::vector<double> exact = exact_level_map(levels, L0, t, eps);
    std::vector<LevelEstimate> out;
    for (std::size_t level = 1; level <= levels; ++level) {
        LevelEstimate est{level, 0, 0, exact[level - 1]};
        if (eps == 0.0) {
            out.push_back(est);
            continue;
        }
        const detail::TreeSampler ts(L0, t, eps);
        const std::size_t chunks = chunk_count(samples);
        std::vector<double> sum(chunks, 0.0);
        std::vector<double> sum_sq(chunks, 0.0);
        const std::uint64_t level_seed = derive_seed(seed, level);
        parallel_for(chunks, workers, [&](std::size_t c) {
            Rng rng(derive_seed(level_seed, c));
            const std::size_t begin = c * kChunkSamples;
            const std::size_t end = std::min(samples, begin + kChunkSamples);
            double s = 0;
            double s2 = 0;
            for (std::size_t i = begin; i < end; ++i) {
                double w = 0;
                if (sampler == LevelSampler::plain) {
                    w = ts.draw_plain(level, rng) ? 1.0 : 0.0;
                } else {
                    const bool targeted = uniform01(rng) >= kDefensiveWeight;
                    const detail::TreeDraw d = ts.draw(level, targeted, rng);
                    if (d.failed) {
                        // 1 / (a + (1 - a) rho), evaluated stably for huge rho
                        const double a = kDefensiveWeight;
                        if (d.log_ratio > 0) {
                            w = std::exp(-d.log_ratio) / (a * std::exp(-d.log_ratio) + (1 - a));
                        } else {
                            w = 1.0 / (a + (1 - a) * std::exp(d.log_ratio));
                        }
                    }
                }
                s += w;
                s2 += w * w;
            }
            sum[c] = s;
            sum_sq[c] = s2;
        });
        double s = 0;
        double s2 = 0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sum[c];
            s2 += sum_sq[c];
        }
        const double n = static_cast<double>(samples);
        const double mean = s / n;
        const double var = samples > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1)) : 0.0;
        est.estimate = mean;
        est.stderr_ = std::sqrt(var / n);
        out.push_back(est);
    }
    return out;
}

}  // namespace ftlab

#endif  // FTLAB_GADGETS_HPP
