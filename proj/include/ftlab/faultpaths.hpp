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

#ifndef FTLAB_FAULTPATHS_HPP
#define FTLAB_FAULTPATHS_HPP

/// \file faultpaths.hpp
/// Fault-path expansion: zeta objects, exact accuracy, closed-form bounds and
/// inclusion-exclusion bookkeeping.
///
/// A zeta object is the action of the expanded evolution on the circuit's
/// fixed initial state, so it is a Matrix on the system space (or a joint
/// vector for environment runs).

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ftlab/circuit.hpp"
#include "ftlab/parallel.hpp"

namespace ftlab {

inline constexpr std::size_t kMaxEnumLocations = 16;
inline constexpr std::size_t kMaxEnumOrder = 4;

/// What the locations outside a zeta subset carry.
enum class ZetaConvention {
    full_complement,   // N on the complement: sums all paths whose faults include the subset
    ideal_complement,  // I on the complement: the single path faulty exactly on the subset
};

namespace detail {

inline FaultAssignment subset_roles(std::size_t L, const std::vector<std::size_t> &subset, ZetaConvention conv) {
    if (subset.empty()) {
        throw std::invalid_argument("zeta subset must be nonempty");
    }
    FaultAssignment roles(L, conv == ZetaConvention::full_complement ? Role::full : Role::ideal);
    for (std::size_t j : subset) {
        if (j >= L) {
            throw std::invalid_argument("zeta subset location " + std::to_string(j) + " out of range");
        }
        if (roles[j] == Role::fault) {
            throw std::invalid_argument("zeta subset repeats location " + std::to_string(j));
        }
        roles[j] = Role::fault;
    }
    return roles;
}

inline FaultAssignment earliest_roles(std::size_t L, std::size_t r) {
    if (r >= L) {
        throw std::invalid_argument("earliest-fault location out of range");
    }
    FaultAssignment roles(L, Role::full);
    for (std::size_t j = 0; j < r; ++j) {
        roles[j] = Role::ideal;
    }
    roles[r] = Role::fault;
    return roles;
}

inline std::vector<std::size_t> mask_members(std::uint64_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; mask != 0; ++j, mask >>= 1) {
        if (mask & 1U) {
            out.push_back(j);
        }
    }
    return out;
}

}  // namespace detail

inline Matrix zeta_subset(const Circuit &c, const NoiseMap &noise, const std::vector<std::size_t> &subset,
                          ZetaConvention conv = ZetaConvention::full_complement) {
    return evolve(c, noise, detail::subset_roles(c.size(), subset, conv));
}

/// I before r, F_r at r, N after r.
inline Matrix zeta_earliest(const Circuit &c, const NoiseMap &noise, std::size_t r) {
    return evolve(c, noise, detail::earliest_roles(c.size(), r));
}

/// rho_noisy - rho_ideal.
inline Matrix faulty_part(const Circuit &c, const NoiseMap &noise) {
    return evolve(c, noise, FaultAssignment(c.size(), Role::full)) -
           evolve(c, noise, FaultAssignment(c.size(), Role::ideal));
}

/// Rebuilds rho_noisy - rho_ideal from zeta objects alone: the signed sum
/// sum_{S nonempty} (-1)^{|S|-1} zeta(S) under full_complement, or the plain
/// sum of all single paths under ideal_complement.
inline Matrix fault_path_sum(const Circuit &c, const NoiseMap &noise,
                             ZetaConvention conv = ZetaConvention::full_complement) {
    const std::size_t L = c.size();
    if (L > kMaxEnumLocations) {
        throw CapExceeded("fault_path_sum: more than 16 locations");
    }
    Matrix total = Matrix::zeros(SubsystemDims::qubits(c.n_system));
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << L); ++mask) {
        const auto members = detail::mask_members(mask);
        const Matrix z = zeta_subset(c, noise, members, conv);
        const double sign = conv == ZetaConvention::ideal_complement || (members.size() % 2 == 1) ? 1.0 : -1.0;
        total += z * cplx(sign);
    }
    return total;
}

struct ZetaScan {
    std::size_t order = 0;
    std::size_t subsets = 0;
    double max_trace_norm = 0;
    std::vector<std::size_t> argmax;
};

/// Largest trace norm of zeta over all subsets of size r.
inline ZetaScan scan_zeta(const Circuit &c, const NoiseMap &noise, std::size_t r, ZetaConvention conv,
                          std::size_t workers = 1) {
    const std::size_t L = c.size();
    if (L > kMaxEnumLocations || r > kMaxEnumOrder) {
        throw CapExceeded("zeta enumeration is capped at 16 locations and order 4");
    }
    if (r == 0 || r > L) {
        throw std::invalid_argument("zeta order must lie in [1, L]");
    }
    std::vector<std::uint64_t> masks;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << L); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) == r) {
            masks.push_back(mask);
        }
    }
    std::vector<double> norms(masks.size());
    parallel_for(masks.size(), workers, [&](std::size_t i) {
        norms[i] = trace_norm(zeta_subset(c, noise, detail::mask_members(masks[i]), conv));
    });
    ZetaScan out{r, masks.size(), 0.0, {}};
    for (std::size_t i = 0; i < masks.size(); ++i) {
        if (out.argmax.empty() || norms[i] > out.max_trace_norm) {
            out.max_trace_norm = norms[i];
            out.argmax = detail::mask_members(masks[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Environment fault paths

/// Joint state vector for the unitary fault paths on `subset`.
inline DenseMatrix theta_subset(const Circuit &c, const EnvironmentSpec &env, const std::vector<std::size_t> &subset,
                                ZetaConvention conv = ZetaConvention::full_complement) {
    return evolve_with_environment(c, env, detail::subset_roles(c.size(), subset, conv));
}

inline DenseMatrix theta_earliest(const Circuit &c, const EnvironmentSpec &env, std::size_t r) {
    return evolve_with_environment(c, env, detail::earliest_roles(c.size(), r));
}

// ---------------------------------------------------------------------------
// Accuracy

inline double accuracy_delta_exact(const Circuit &c, const NoiseMap &noise) {
    return kolmogorov_distance(simulate_noisy(c, noise).outcomes, simulate_ideal(c).outcomes);
}

inline double accuracy_delta_exact(const Circuit &c, const EnvironmentSpec &env) {
    return kolmogorov_distance(simulate_with_environment(c, env).outcomes, simulate_ideal(c).outcomes);
}

enum class BoundVariant {
    linear,         // L eps
    e_minus_1,      // (e - 1) L eps, needs eps <= 1/L
    non_markovian,  // 2 L eps
    encoded,        // (e - 1) L eps1
};

inline double accuracy_bound(std::size_t L, double eps, BoundVariant variant, std::optional<double> eps1 = {}) {
    if (!(eps >= 0) || !std::isfinite(eps)) {
        throw std::invalid_argument("accuracy_bound: eps must be finite and non-negative");
    }
    const double n = static_cast<double>(L);
    switch (variant) {
    case BoundVariant::linear:
        return n * eps;
    case BoundVariant::e_minus_1:
        if (L > 0 && eps > 1.0 / n) {
            throw std::invalid_argument("accuracy_bound: the (e-1) L eps bound requires eps <= 1/L");
        }
        return (std::numbers::e - 1.0) * n * eps;
    case BoundVariant::non_markovian:
        return 2.0 * n * eps;
    case BoundVariant::encoded:
        if (!eps1 || !(*eps1 >= 0) || !std::isfinite(*eps1)) {
            throw std::invalid_argument("accuracy_bound: encoded variant needs a non-negative eps1");
        }
        return (std::numbers::e - 1.0) * n * *eps1;
    }
    throw std::invalid_argument("accuracy_bound: unknown variant");
}

// ---------------------------------------------------------------------------
// Inclusion-exclusion

struct SignedCount {
    std::int64_t value = 0;
    friend bool operator==(SignedCount, SignedCount) = default;
};

/// Exact binomial coefficient; throws on int64 overflow.
inline std::int64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::int64_t>::max()) {
            throw std::overflow_error("binomial coefficient overflows 64 bits");
        }
    }
    return static_cast<std::int64_t>(r);
}

/// Weight of the s-fault subsets in the expansion of the ">t faults" event:
/// (-1)^(s-t-1) C(s-1, t).
inline SignedCount ie_coefficient(std::size_t s, std::size_t t) {
    if (s <= t) {
        throw std::invalid_argument("ie_coefficient requires s >= t + 1");
    }
    const std::int64_t mag = binomial(s - 1, t);
    return {((s - t - 1) % 2 == 0) ? mag : -mag};
}

struct IeCheck {
    bool ok = true;
    std::optional<std::uint64_t> counterexample;  // fault pattern as a bitmask
    std::string identity;                          // which identity failed
    std::int64_t multiplicity = 0;
};

/// Exhaustive check over all fault patterns on L0 locations: summing
/// ie_coefficient over the subsets of size > t inside a pattern gives 1 iff
/// the pattern has more than t faults, and the alternating sum over nonempty
/// subsets gives 1 for every nonempty pattern.
inline IeCheck verify_ie_identity(std::size_t L0, std::size_t t) {
    if (L0 > 12 || t >= L0) {
        throw std::invalid_argument("verify_ie_identity requires L0 <= 12 and t < L0");
    }
    std::vector<std::int64_t> coef(L0 + 1, 0);
    for (std::size_t s = t + 1; s <= L0; ++s) {
        coef[s] = ie_coefficient(s, t).value;
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << L0); ++mask) {
        std::int64_t graded = 0;
        std::int64_t alternating = 0;
        for (std::uint64_t sub = mask;; sub = (sub - 1) & mask) {
            const auto s = static_cast<std::size_t>(std::popcount(sub));
            graded += coef[s];
            if (s > 0) {
                alternating += (s % 2 == 1) ? 1 : -1;
            }
            if (sub == 0) {
                break;
            }
        }
        const auto f = static_cast<std::size_t>(std::popcount(mask));
        if (graded != (f > t ? 1 : 0)) {
            return {false, mask, "graded", graded};
        }
        if (alternating != (f > 0 ? 1 : 0)) {
            return {false, mask, "alternating", alternating};
        }
    }
    return {};
}

}  // namespace ftlab

#endif  // FTLAB_FAULTPATHS_HPP
