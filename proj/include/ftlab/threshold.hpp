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

#ifndef FTLAB_THRESHOLD_HPP
#define FTLAB_THRESHOLD_HPP

/// \file threshold.hpp
/// Renormalization map, threshold, level-k strength, required level,
/// overhead, and the pseudothreshold locator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ftlab/faultpaths.hpp"
#include "ftlab/gadgets.hpp"

namespace ftlab {

struct SchemeParams {
    std::size_t L0 = 0;
    std::size_t t = 1;
    double xi = std::numbers::e;
    BoundVariant variant = BoundVariant::e_minus_1;

    void validate() const {
        if (t < 1) {
            throw std::invalid_argument("t must be at least 1");
        }
        if (L0 <= t) {
            throw std::invalid_argument("L0 must exceed t");
        }
        if (!(xi >= 1.0) || !std::isfinite(xi)) {
            throw std::invalid_argument("xi must be finite and at least 1");
        }
    }

    /// xi * C(L0, t+1)
    double prefactor() const { return xi * static_cast<double>(binomial(L0, t + 1)); }
};

inline double renormalize_strength(double eps_prev, const SchemeParams &p) {
    p.validate();
    if (!(eps_prev >= 0)) {
        throw std::invalid_argument("strength must be non-negative");
    }
    return p.prefactor() * std::pow(eps_prev, static_cast<double>(p.t + 1));
}

inline double threshold_value(const SchemeParams &p) {
    p.validate();
    return std::pow(p.prefactor(), -1.0 / static_cast<double>(p.t));
}

/// eps0 (eps/eps0)^((t+1)^k), the closed-form solution of the recursion.
inline double strength_at_level(double eps, std::size_t k, const SchemeParams &p) {
    if (!(eps >= 0)) {
        throw std::invalid_argument("strength must be non-negative");
    }
    const double e0 = threshold_value(p);
    if (k == 0) {
        return eps;
    }
    const double exponent = std::pow(static_cast<double>(p.t + 1), static_cast<double>(k));
    return e0 * std::pow(eps / e0, exponent);
}

/// Target inequality in its direct form: (e-1) L eps^(k) <= delta0.
inline bool meets_target(std::size_t L, double delta0, double eps, std::size_t k, const SchemeParams &p) {
    return (std::numbers::e - 1.0) * static_cast<double>(L) * strength_at_level(eps, k, p) <= delta0;
}

/// Target inequality in log form: (t+1)^k >= log((e-1) L eps0 / delta0) / log(eps0 / eps).
inline bool meets_target_log_form(std::size_t L, double delta0, double eps, std::size_t k, const SchemeParams &p) {
    const double e0 = threshold_value(p);
    const double lhs = std::pow(static_cast<double>(p.t + 1), static_cast<double>(k));
    const double rhs = std::log((std::numbers::e - 1.0) * static_cast<double>(L) * e0 / delta0) / std::log(e0 / eps);
    return lhs >= rhs;
}

inline constexpr std::size_t kMaxLevel = 64;

/// Smallest k <= 64 with (e-1) L eps^(k) <= delta0.
inline std::size_t required_level(std::size_t L, double delta0, double eps, const SchemeParams &p) {
    if (!(delta0 > 0 && delta0 < 1)) {
        throw std::invalid_argument("target error must lie in (0, 1)");
    }
    if (!(eps >= 0)) {
        throw std::invalid_argument("strength must be non-negative");
    }
    const double e0 = threshold_value(p);
    if (!(eps < e0)) {
        throw std::domain_error("strength is not below threshold; no finite concatenation level exists");
    }
    for (std::size_t k = 0; k <= kMaxLevel; ++k) {
        if (meets_target(L, delta0, eps, k, p)) {
            return k;
        }
    }
    throw CapExceeded("required concatenation level exceeds 64");
}

struct Overhead {
    double ratio = 1;
    double a = 0;
};

/// L0^k, with a = log L0 / log(t+1).
inline Overhead overhead_ratio(std::size_t k, const SchemeParams &p) {
    p.validate();
    return {std::pow(static_cast<double>(p.L0), static_cast<double>(k)),
            std::log(static_cast<double>(p.L0)) / std::log(static_cast<double>(p.t + 1))};
}

// ---------------------------------------------------------------------------
// Pseudothreshold

inline constexpr double kBisectionTol = 1e-8;
inline constexpr double kPseudoUpper = 0.5;

/// Root of f on (lo, hi) given f(lo) < 0 <= f(hi).
inline double bisect(const std::function<double(double)> &f, double lo, double hi, double tol = kBisectionTol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct Pseudothreshold {
    double eps_star = 0;
    double ci_low = 0;
    double ci_high = 0;
    bool sampled = false;
    std::size_t samples = 0;
};

namespace detail {

inline double pseudo_lower_start(const std::function<double(double)> &g) {
    double lo = 1e-6;
    while (g(lo) >= 0 && lo > 1e-300) {
        lo *= 1e-3;
    }
    return lo;
}

}  // namespace detail

/// Crossing of P[Bin(L0, eps) > t] = eps in (0, 0.5).
inline Pseudothreshold pseudothreshold_exact(const SchemeParams &p) {
    p.validate();
    auto g = [&](double e) { return level1_failure_exact(p.L0, p.t, e) - e; };
    if (g(kPseudoUpper) < 0) {
        throw std::domain_error("no pseudothreshold crossing in (0, 0.5)");
    }
    const double lo = detail::pseudo_lower_start(g);
    if (g(lo) >= 0) {
        throw std::domain_error("no pseudothreshold crossing in (0, 0.5)");
    }
    const double root = bisect(g, lo, kPseudoUpper);
    return {root, root, root, false, 0};
}

/// Sampled crossing using common random numbers: sample i fails at eps iff
/// its (t+1)-th smallest uniform is below eps, so the estimate is a monotone
/// step function of eps. The interval brackets the crossings of
/// estimate +- z * stderr.
inline Pseudothreshold pseudothreshold_mc(const SchemeParams &p, std::size_t samples, std::uint64_t seed,
                                          std::size_t workers = 1, double z = 3.0) {
    p.validate();
    if (samples < 1000) {
        throw std::invalid_argument("pseudothreshold sampling needs at least 1000 samples");
    }
    if (static_cast<double>(samples) * static_cast<double>(p.L0) > kMaxLeafDraws) {
        throw CapExceeded("pseudothreshold sampling exceeds the 1e9 draw budget");
    }
    const std::size_t chunks = chunk_count(samples);
    std::vector<double> order_stat(samples);
    parallel_for(chunks, workers, [&](std::size_t c) {
        Rng rng(derive_seed(seed, c));
        std::vector<double> u(p.L0);
        const std::size_t begin = c * kChunkSamples;
        const std::size_t end = std::min(samples, begin + kChunkSamples);
        for (std::size_t s = begin; s < end; ++s) {
            for (double &x : u) {
                x = uniform01(rng);
            }
            std::nth_element(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(p.t), u.end());
            order_stat[s] = u[p.t];
        }
    });
    std::sort(order_stat.begin(), order_stat.end());
    const double n = static_cast<double>(samples);
    auto estimate = [&](double e) {
        return static_cast<double>(std::lower_bound(order_stat.begin(), order_stat.end(), e) - order_stat.begin()) / n;
    };
    auto stderr_at = [&](double e) {
        const double q = estimate(e);
        return std::sqrt(q * (1 - q) / n);
    };
    auto mid = [&](double e) { return estimate(e) - e; };
    auto upper_curve = [&](double e) { return estimate(e) + z * stderr_at(e) - e; };
    auto lower_curve = [&](double e) { return estimate(e) - z * stderr_at(e) - e; };
    if (mid(kPseudoUpper) < 0) {
        throw std::domain_error("no pseudothreshold crossing in (0, 0.5)");
    }
    const double lo = detail::pseudo_lower_start(mid);
    if (mid(lo) >= 0) {
        throw std::domain_error("no pseudothreshold crossing in (0, 0.5)");
    }
    Pseudothreshold out;
    out.sampled = true;
    out.samples = samples;
    out.eps_star = bisect(mid, lo, kPseudoUpper);
    out.ci_low = upper_curve(lo) >= 0 ? lo : bisect(upper_curve, lo, kPseudoUpper);
    out.ci_high = lower_curve(kPseudoUpper) < 0 ? kPseudoUpper : bisect(lower_curve, lo, kPseudoUpper);
    out.ci_low = std::min(out.ci_low, out.eps_star);
    out.ci_high = std::max(out.ci_high, out.eps_star);
    return out;
}

// ---------------------------------------------------------------------------
// Report

struct ThresholdReport {
    double eps0 = 0;
    std::vector<double> per_level;  // eps^(0) .. eps^(levels)
    std::optional<std::size_t> k_required;
    double overhead = 1;
    double exponent_a = 0;
    bool below_threshold = false;
};

/// Level strengths up to `levels`, plus required level and overhead for a
/// circuit of size L with target delta0 when eps is below threshold.
inline ThresholdReport threshold_report(double eps, std::size_t levels, std::size_t L, double delta0,
                                        const SchemeParams &p) {
    ThresholdReport r;
    r.eps0 = threshold_value(p);
    for (std::size_t k = 0; k <= levels; ++k) {
        r.per_level.push_back(strength_at_level(eps, k, p));
    }
    r.below_threshold = eps < r.eps0;
    const Overhead base = overhead_ratio(0, p);
    r.exponent_a = base.a;
    if (r.below_threshold) {
        r.k_required = required_level(L, delta0, eps, p);
        r.overhead = overhead_ratio(*r.k_required, p).ratio;
    }
    return r;
}

}  // namespace ftlab

#endif  // FTLAB_THRESHOLD_HPP
