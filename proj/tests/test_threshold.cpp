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


#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

namespace ftlab {
namespace {

constexpr double kE = std::numbers::e;

SchemeParams scheme(std::size_t L0, std::size_t t, double xi = kE) {
    SchemeParams p;
    p.L0 = L0;
    p.t = t;
    p.xi = xi;
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(Scheme, Validation) {
    EXPECT_THROW(scheme(5, 0).validate(), std::invalid_argument);
    EXPECT_THROW(scheme(2, 2).validate(), std::invalid_argument);
    EXPECT_THROW(scheme(5, 1, 0.5).validate(), std::invalid_argument);
    EXPECT_NO_THROW(scheme(2, 1).validate());
}

TEST(Renormalize, Examples) {
    EXPECT_EQ(renormalize_strength(0.0, scheme(5, 1)), 0.0);
    EXPECT_NEAR(renormalize_strength(0.01, scheme(5, 1)), 0.002718281828459045, 1e-17);
    for (std::size_t L0 : {5, 7, 49, 100}) {
        for (std::size_t t = 1; t <= 3 && t < L0; ++t) {
            const SchemeParams p = scheme(L0, t);
            const double e0 = threshold_value(p);
            EXPECT_LE(rel(renormalize_strength(e0, p), e0), 1e-12);
        }
    }
    EXPECT_THROW(renormalize_strength(-1.0, scheme(5, 1)), std::invalid_argument);
}

TEST(Threshold, Examples) {
    EXPECT_LE(rel(threshold_value(scheme(100, 1)), 1.0 / (kE * 4950.0)), 1e-12);
    EXPECT_NEAR(threshold_value(scheme(100, 1)), 7.431e-5, 1e-8);
    for (std::size_t t = 1; t <= 3; ++t) {
        EXPECT_LE(rel(threshold_value(scheme(t + 1, t, 3.0)), std::pow(3.0, -1.0 / static_cast<double>(t))), 1e-14);
    }
}

TEST(Threshold, DecreasesInL0) {
    for (std::size_t t = 1; t <= 3; ++t) {
        double prev = 2;
        for (std::size_t L0 = t + 1; L0 <= 60; ++L0) {
            const double e0 = threshold_value(scheme(L0, t));
            EXPECT_LT(e0, prev);
            prev = e0;
        }
    }
}

TEST(StrengthAtLevel, Examples) {
    const SchemeParams p = scheme(100, 1);
    EXPECT_EQ(strength_at_level(3e-5, 0, p), 3e-5);
    EXPECT_LE(rel(strength_at_level(3e-5, 3, p), 5.2392340944818824e-08), 1e-9);
    const double e0 = threshold_value(p);
    for (std::size_t k = 0; k <= 10; ++k) {
        EXPECT_LE(rel(strength_at_level(e0, k, p), e0), 1e-12);
    }
}

TEST(StrengthAtLevel, EqualsIteratedRenormalization) {
    for (std::size_t L0 : {5, 20, 100}) {
        for (std::size_t t = 1; t <= 3; ++t) {
            const SchemeParams p = scheme(L0, t);
            const double e0 = threshold_value(p);
            for (double f : {0.1, 0.5, 0.9, 1.05}) {
                double e = f * e0;
                for (std::size_t k = 1; k <= 10; ++k) {
                    e = renormalize_strength(e, p);
                    const double closed = strength_at_level(f * e0, k, p);
                    if (closed > 1e-290 && std::isfinite(closed)) {
                        EXPECT_LE(rel(closed, e), 1e-9) << L0 << " " << t << " " << f << " " << k;
                    }
                }
            }
        }
    }
}

TEST(StrengthAtLevel, MonotoneAroundThreshold) {
    const SchemeParams p = scheme(49, 2);
    const double e0 = threshold_value(p);
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_GT(strength_at_level(0.7 * e0, k, p), strength_at_level(0.7 * e0, k + 1, p));
        EXPECT_LT(strength_at_level(1.3 * e0, k, p), strength_at_level(1.3 * e0, k + 1, p));
    }
}

TEST(RequiredLevel, Examples) {
    const SchemeParams p = scheme(100, 1);
    EXPECT_EQ(required_level(1000000, 1e-3, 3e-5, p), 4U);
    EXPECT_EQ(required_level(10, 0.5, 1e-5, p), 0U);
    EXPECT_THROW(required_level(10, 0.5, threshold_value(p), p), std::domain_error);
    EXPECT_THROW(required_level(10, 1.5, 1e-5, p), std::invalid_argument);
    EXPECT_THROW(required_level(10, 0.0, 1e-5, p), std::invalid_argument);
}

TEST(RequiredLevel, GridMinimalAndConsistentWithLogForm) {
    std::size_t checked = 0;
    for (std::size_t L : {10, 1000, 100000, 10000000, 1000000000}) {
        for (double delta0 : {1e-1, 1e-3, 1e-6, 1e-9}) {
            for (double f : {0.01, 0.2, 0.5, 0.8, 0.99}) {
                const SchemeParams p = scheme(100, 1);
                const double eps = f * threshold_value(p);
                const std::size_t k = required_level(L, delta0, eps, p);
                EXPECT_TRUE(meets_target(L, delta0, eps, k, p));
                EXPECT_TRUE(meets_target_log_form(L, delta0, eps, k, p));
                if (k > 0) {
                    EXPECT_FALSE(meets_target(L, delta0, eps, k - 1, p));
                    EXPECT_FALSE(meets_target_log_form(L, delta0, eps, k - 1, p));
                }
                ++checked;
            }
        }
    }
    EXPECT_EQ(checked, 100U);
}

TEST(RequiredLevel, GrowsDoublyLogarithmically) {
    const SchemeParams p = scheme(100, 1);
    const double e0 = threshold_value(p);
    const double eps = e0 / 2;
    std::vector<double> x;
    std::vector<double> y;
    for (int m = 10; m <= 300; m += 10) {
        const double delta0 = std::pow(10.0, -m);
        const std::size_t k = required_level(1000, delta0, eps, p);
        const double kstar = std::log2(std::log((kE - 1) * 1000 * e0 / delta0) / std::log(2.0));
        EXPECT_GE(static_cast<double>(k), kstar - 1e-9);
        EXPECT_LT(static_cast<double>(k), kstar + 1);
        x.push_back(std::log2(std::log(1.0 / delta0)));
        y.push_back(kstar);
    }
    // least-squares slope of k* against log2 ln(1/delta0)
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    EXPECT_NEAR(slope, 1.0, 0.1);
}

TEST(Overhead, Examples) {
    EXPECT_EQ(overhead_ratio(0, scheme(100, 1)).ratio, 1.0);
    EXPECT_NEAR(overhead_ratio(3, scheme(100, 1)).ratio, 1e6, 1e-6);
    EXPECT_NEAR(overhead_ratio(1, scheme(100, 1)).a, 6.643856189774725, 1e-12);
}

TEST(Overhead, PolylogarithmicInCircuitSize) {
    for (std::size_t L0 : {7, 49, 100}) {
        for (std::size_t t = 1; t <= 2; ++t) {
            const SchemeParams p = scheme(L0, t);
            const double e0 = threshold_value(p);
            for (std::size_t L : {100, 10000, 1000000}) {
                for (double f : {0.1, 0.5, 0.9}) {
                    const double eps = f * e0;
                    const std::size_t k = required_level(L, 1e-3, eps, p);
                    const auto o = overhead_ratio(k, p);
                    const double x = std::log((kE - 1) * static_cast<double>(L) * e0 / 1e-3) / std::log(e0 / eps);
                    EXPECT_LE(o.ratio, static_cast<double>(L0) * std::pow(std::max(x, 1.0), o.a) * (1 + 1e-9));
                }
            }
        }
    }
}

TEST(Pseudothreshold, ExactCrossing) {
    const auto r = pseudothreshold_exact(scheme(5, 1));
    EXPECT_NEAR(r.eps_star, 0.13112314790418053, 1e-8);
    EXPECT_FALSE(r.sampled);
    EXPECT_NEAR(level1_failure_exact(5, 1, r.eps_star), r.eps_star, 1e-8);
}

TEST(Pseudothreshold, ClosedFormThresholdIsConservative) {
    for (std::size_t L0 = 3; L0 <= 30; ++L0) {
        for (std::size_t t = 1; t <= 3 && 2 * t + 2 <= L0; ++t) {
            const SchemeParams p = scheme(L0, t);
            EXPECT_LE(threshold_value(p), pseudothreshold_exact(p).eps_star) << L0 << " " << t;
        }
    }
}

TEST(Pseudothreshold, SampledAgreesWithinInterval) {
    const auto r = pseudothreshold_mc(scheme(5, 1), 200000, 17);
    EXPECT_TRUE(r.sampled);
    EXPECT_LE(r.ci_low, r.eps_star);
    EXPECT_GE(r.ci_high, r.eps_star);
    EXPECT_LE(r.ci_low, 0.13112314790418053);
    EXPECT_GE(r.ci_high, 0.13112314790418053);
    EXPECT_LT(r.ci_high - r.ci_low, 0.02);
    const auto again = pseudothreshold_mc(scheme(5, 1), 200000, 17, 4);
    EXPECT_EQ(again.eps_star, r.eps_star);
    EXPECT_EQ(again.ci_low, r.ci_low);
    EXPECT_EQ(again.ci_high, r.ci_high);
    EXPECT_THROW(pseudothreshold_mc(scheme(5, 1), 999, 17), std::invalid_argument);
}

TEST(Pseudothreshold, NoCrossingReported) {
    // L0 = 2, t = 1: P[Bin(2, e) > 1] = e^2 < e on (0, 0.5)
    EXPECT_THROW(pseudothreshold_exact(scheme(2, 1)), std::domain_error);
}

TEST(Report, CollectsEverything) {
    const auto r = threshold_report(3e-5, 5, 1000000, 1e-3, scheme(100, 1));
    ASSERT_EQ(r.per_level.size(), 6U);
    EXPECT_TRUE(r.below_threshold);
    ASSERT_TRUE(r.k_required.has_value());
    EXPECT_EQ(*r.k_required, 4U);
    EXPECT_NEAR(r.overhead, 1e8, 1e-3);
    const auto above = threshold_report(1e-3, 3, 1000, 1e-3, scheme(100, 1));
    EXPECT_FALSE(above.below_threshold);
    EXPECT_FALSE(above.k_required.has_value());
}

}  // namespace
}  // namespace ftlab
