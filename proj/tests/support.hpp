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

#ifndef FTLAB_TESTS_SUPPORT_HPP
#define FTLAB_TESTS_SUPPORT_HPP

// Shared generators and brute-force oracles for the test suite.

#include <random>
#include <vector>

#include "ftlab/ftlab.hpp"

namespace ftlab::testing {

inline DenseMatrix random_complex(std::size_t d, Rng &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    DenseMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = cplx(n(rng), n(rng));
        }
    }
    return m;
}

inline Matrix random_unitary(const SubsystemDims &dims, Rng &rng) {
    const DenseMatrix g = random_complex(dims.total(), rng);
    Eigen::HouseholderQR<DenseMatrix> qr(g);
    DenseMatrix q = qr.householderQ();
    const DenseMatrix r = qr.matrixQR();
    for (Eigen::Index i = 0; i < q.cols(); ++i) {
        const cplx d = r(i, i);
        q.col(i) *= d / std::abs(d);
    }
    return Matrix(dims, q);
}

inline Matrix random_hermitian(const SubsystemDims &dims, Rng &rng) {
    const DenseMatrix g = random_complex(dims.total(), rng);
    return Matrix(dims, (g + g.adjoint()) * 0.5);
}

inline DenseVector random_state(std::size_t d, Rng &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    DenseVector v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = cplx(n(rng), n(rng));
    }
    return v / v.norm();
}

inline Matrix random_density(const SubsystemDims &dims, Rng &rng) {
    const DenseMatrix g = random_complex(dims.total(), rng);
    DenseMatrix rho = g * g.adjoint();
    rho /= rho.trace();
    return Matrix(dims, rho);
}

inline double uniform(Rng &rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
inline std::size_t pick(Rng &rng, std::size_t n) { return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)); }

inline Matrix random_pauli(Rng &rng) {
    switch (pick(rng, 3)) {
    case 0:
        return gates::X();
    case 1:
        return gates::Y();
    default:
        return gates::Z();
    }
}

/// A random zoo model on one qubit with strength parameters up to `scale`.
inline NoiseSpec random_single_qubit_noise(Rng &rng, double scale) {
    switch (pick(rng, 4)) {
    case 0:
        return ControlRotation{uniform(rng, -scale, scale)};
    case 1:
        return AmplitudeDamping{uniform(rng, 0, scale), 1.0};
    case 2: {
        Probabilistic p;
        p.p = uniform(rng, 0, scale);
        p.E = pick(rng, 2) == 0 ? random_pauli(rng) : random_unitary({2}, rng);
        return p;
    }
    default:
        return Depolarizing{uniform(rng, 0, scale), 1};
    }
}

struct RandomInstance {
    Circuit circuit;
    NoiseMap noise;
};

/// Random circuit on up to `max_qubits` qubits with 1..max_locations
/// locations (preparations, 1- and 2-qubit gates, intermediate measurements,
/// idles) measured in Z at the end, with zoo noise on every location.
inline RandomInstance random_instance(Rng &rng, std::size_t max_qubits, std::size_t max_locations, double scale,
                                      bool intermediate_measurements = true) {
    RandomInstance inst;
    Circuit &c = inst.circuit;
    c.n_system = 1 + pick(rng, max_qubits);
    const std::size_t L = 1 + pick(rng, max_locations);
    for (std::size_t j = 0; j < L; ++j) {
        const std::size_t q = pick(rng, c.n_system);
        std::size_t kind = pick(rng, intermediate_measurements ? 5 : 4);
        if (kind == 2 && c.n_system < 2) {
            kind = 1;
        }
        Location l;
        switch (kind) {
        case 0:
            l = loc::prep(j, q, random_state(2, rng));
            break;
        case 1:
            l = loc::gate(j, random_unitary({2}, rng), {q});
            break;
        case 2: {
            std::size_t q2 = pick(rng, c.n_system - 1);
            if (q2 >= q) {
                ++q2;
            }
            l = loc::gate(j, pick(rng, 2) == 0 ? gates::CNOT() : random_unitary({2, 2}, rng), {q, q2});
            break;
        }
        case 3:
            l = loc::idle(j, {q});
            break;
        default:
            l = loc::measure(j, q, pick(rng, 2) == 0 ? z_projectors() : x_projectors());
            break;
        }
        c.locations.push_back(std::move(l));
    }
    c.final_measure = measure_all_z(c.n_system);
    for (std::size_t j = 0; j < L; ++j) {
        const auto &sup = c.locations[j].support;
        Channel ch = make_noise_channel(random_single_qubit_noise(rng, scale)).at({sup[0]});
        if (sup.size() == 2) {
            switch (pick(rng, 3)) {
            case 0:
                ch = make_noise_channel(Depolarizing{uniform(rng, 0, scale), 2}).at(sup);
                break;
            case 1: {
                Probabilistic p;
                p.p = uniform(rng, 0, scale);
                p.E = random_unitary({2, 2}, rng);
                ch = make_noise_channel(p).at(sup);
                break;
            }
            default:
                ch = make_noise_channel(random_single_qubit_noise(rng, scale)).at({sup[pick(rng, 2)]});
                break;
            }
        }
        inst.noise.emplace(j, ch);
    }
    return inst;
}

/// Largest diamond-norm strength over the noise of an instance.
inline double instance_strength(const NoiseMap &noise, const DiamondOptions &opt = {}) {
    double eps = 0;
    for (const auto &[_, ch] : noise) {
        eps = std::max(eps, noise_strength(ch, opt));
    }
    return eps;
}

/// Explicit Choi matrix by applying the channel to every |i><j|.
inline DenseMatrix choi_oracle(const Channel &ch) {
    const auto d = static_cast<Eigen::Index>(ch.dim());
    DenseMatrix j = DenseMatrix::Zero(d * d, d * d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index b = 0; b < d; ++b) {
            DenseMatrix e = DenseMatrix::Zero(d, d);
            e(a, b) = 1;
            DenseMatrix out = DenseMatrix::Zero(d, d);
            for (const auto &k : ch.kraus()) {
                out += k.data() * e * k.data().adjoint();
            }
            // output (x) reference ordering: row = out*d + ref
            for (Eigen::Index x = 0; x < d; ++x) {
                for (Eigen::Index y = 0; y < d; ++y) {
                    j(x * d + a, y * d + b) = out(x, y);
                }
            }
        }
    }
    return j;
}

/// Coefficients a_s that make every pattern with f > t faults count exactly
/// once: a_{t+1} = 1, a_f = 1 - sum_{t<s<f} a_s C(f, s).
inline std::vector<std::int64_t> ie_multiplicity_oracle(std::size_t smax, std::size_t t) {
    std::vector<std::int64_t> a(smax + 1, 0);
    for (std::size_t f = t + 1; f <= smax; ++f) {
        std::int64_t covered = 0;
        for (std::size_t s = t + 1; s < f; ++s) {
            std::int64_t c = 1;
            for (std::size_t i = 1; i <= s; ++i) {
                c = c * static_cast<std::int64_t>(f - s + i) / static_cast<std::int64_t>(i);
            }
            covered += a[s] * c;
        }
        a[f] = 1 - covered;
    }
    return a;
}

}  // namespace ftlab::testing

#endif  // FTLAB_TESTS_SUPPORT_HPP
