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

#ifndef FTLAB_CIRCUIT_HPP
#define FTLAB_CIRCUIT_HPP

/// \file circuit.hpp
/// Circuit representation and exact simulators.
///
/// Locations execute in list order. `step` only groups locations into time
/// intervals for the maximum-parallelism check. Qubits start in |0>.

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ftlab/channels.hpp"
#include "ftlab/matcore.hpp"

namespace ftlab {

struct Prep {
    DenseVector state;  // on the location's support
};
struct Gate {
    Matrix unitary;
};
struct Measure {
    std::vector<Matrix> projectors;  // outcome a <-> projectors[a]
};
struct Idle {};

using Operation = std::variant<Prep, Gate, Measure, Idle>;

/// Apply the gate only when an earlier measurement location gave `outcome`.
struct Condition {
    std::size_t location = 0;
    std::size_t outcome = 0;
};

struct Location {
    std::size_t step = 0;
    Operation op;
    std::vector<std::size_t> support;
    std::optional<Condition> condition;

    bool is_gate() const { return std::holds_alternative<Gate>(op); }
    bool is_measure() const { return std::holds_alternative<Measure>(op); }
    bool is_prep() const { return std::holds_alternative<Prep>(op); }
};

struct FinalMeasurement {
    std::size_t qubit = 0;
    std::vector<Matrix> projectors;
};

struct Circuit {
    std::size_t n_system = 0;
    std::vector<Location> locations;
    std::vector<FinalMeasurement> final_measure;

    std::size_t size() const { return locations.size(); }
};

inline std::vector<Matrix> z_projectors() {
    return {Matrix::basis_projector({2}, 0), Matrix::basis_projector({2}, 1)};
}
inline std::vector<Matrix> x_projectors() {
    const Matrix h = gates::H();
    return {h * Matrix::basis_projector({2}, 0) * h, h * Matrix::basis_projector({2}, 1) * h};
}

inline DenseVector basis_state(std::size_t dim, std::size_t index) {
    DenseVector v = DenseVector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
}

namespace loc {

inline Location prep(std::size_t step, std::size_t qubit, DenseVector state) {
    return {step, Prep{std::move(state)}, {qubit}, std::nullopt};
}
inline Location prep0(std::size_t step, std::size_t qubit) { return prep(step, qubit, basis_state(2, 0)); }
inline Location gate(std::size_t step, Matrix u, std::vector<std::size_t> support) {
    return {step, Gate{std::move(u)}, std::move(support), std::nullopt};
}
inline Location measure(std::size_t step, std::size_t qubit, std::vector<Matrix> projectors = z_projectors()) {
    return {step, Measure{std::move(projectors)}, {qubit}, std::nullopt};
}
inline Location idle(std::size_t step, std::vector<std::size_t> support) {
    return {step, Idle{}, std::move(support), std::nullopt};
}

}  // namespace loc

inline std::vector<FinalMeasurement> measure_all_z(std::size_t n) {
    std::vector<FinalMeasurement> out;
    for (std::size_t q = 0; q < n; ++q) {
        out.push_back({q, z_projectors()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    std::optional<std::size_t> location;
    std::string message;
};

namespace detail {

inline double completeness_defect(const std::vector<Matrix> &projectors, std::size_t dim) {
    if (projectors.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    DenseMatrix s = DenseMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto &p : projectors) {
        if (p.dim() != dim) {
            return std::numeric_limits<double>::infinity();
        }
        s += p.data();
    }
    return (s - DenseMatrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

inline double idempotence_defect(const std::vector<Matrix> &projectors) {
    double worst = 0;
    for (const auto &p : projectors) {
        worst = std::max({worst, (p.data() * p.data() - p.data()).cwiseAbs().maxCoeff(), hermiticity_defect(p)});
    }
    return worst;
}

}  // namespace detail

/// Collects every structural problem; never throws.
inline std::vector<Violation> validate_circuit(const Circuit &c) {
    std::vector<Violation> out;
    auto add = [&](std::optional<std::size_t> at, std::string msg) { out.push_back({at, std::move(msg)}); };
    if (c.n_system > 12) {
        add(std::nullopt, "n_system exceeds the 12-qubit cap");
        return out;
    }
    std::map<std::size_t, std::set<std::size_t>> busy;  // step -> qubits
    std::size_t last_step = 0;
    for (std::size_t i = 0; i < c.locations.size(); ++i) {
        const Location &l = c.locations[i];
        if (i > 0 && l.step < last_step) {
            add(i, "steps must be non-decreasing in list order");
        }
        last_step = std::max(last_step, l.step);
        if (l.support.empty()) {
            add(i, "empty support");
            continue;
        }
        bool in_range = true;
        for (std::size_t q : l.support) {
            if (q >= c.n_system) {
                add(i, "qubit " + std::to_string(q) + " out of range");
                in_range = false;
            }
        }
        if (std::set<std::size_t>(l.support.begin(), l.support.end()).size() != l.support.size()) {
            add(i, "support repeats a qubit");
            in_range = false;
        }
        if (in_range) {
            auto &used = busy[l.step];
            for (std::size_t q : l.support) {
                if (!used.insert(q).second) {
                    add(i, "qubit " + std::to_string(q) + " used twice in step " + std::to_string(l.step));
                }
            }
        }
        const std::size_t dim = std::size_t{1} << l.support.size();
        if (const auto *g = std::get_if<Gate>(&l.op)) {
            if (g->unitary.dim() != dim) {
                add(i, "gate dimension does not match support");
            } else if (!is_unitary(g->unitary)) {
                add(i, "gate is not unitary");
            }
        } else if (const auto *p = std::get_if<Prep>(&l.op)) {
            if (static_cast<std::size_t>(p->state.size()) != dim) {
                add(i, "prepared state dimension does not match support");
            } else if (std::abs(p->state.norm() - 1.0) > 1e-10) {
                add(i, "prepared state is not normalized");
            }
        } else if (const auto *m = std::get_if<Measure>(&l.op)) {
            if (detail::completeness_defect(m->projectors, dim) > 1e-10) {
                add(i, "measurement projectors do not sum to identity");
            } else if (detail::idempotence_defect(m->projectors) > 1e-10) {
                add(i, "measurement operators are not orthogonal projectors");
            }
        }
        if (l.condition) {
            const Condition &cond = *l.condition;
            if (!l.is_gate()) {
                add(i, "only gates may be conditioned");
            }
            if (cond.location >= i) {
                add(i, "condition refers to a later location");
            } else {
                const Location &src = c.locations[cond.location];
                const auto *m = std::get_if<Measure>(&src.op);
                if (m == nullptr) {
                    add(i, "condition refers to a non-measurement location");
                } else if (cond.outcome >= m->projectors.size()) {
                    add(i, "condition outcome out of range");
                }
                if (src.step >= l.step) {
                    add(i, "condition must refer to a strictly earlier step");
                }
            }
        }
    }
    std::set<std::size_t> measured;
    for (const auto &f : c.final_measure) {
        if (f.qubit >= c.n_system) {
            add(std::nullopt, "final measurement qubit " + std::to_string(f.qubit) + " out of range");
            continue;
        }
        if (!measured.insert(f.qubit).second) {
            add(std::nullopt, "qubit " + std::to_string(f.qubit) + " measured twice at the end");
        }
        if (detail::completeness_defect(f.projectors, 2) > 1e-10) {
            add(std::nullopt, "final projectors on qubit " + std::to_string(f.qubit) + " do not sum to identity");
        } else if (detail::idempotence_defect(f.projectors) > 1e-10) {
            add(std::nullopt, "final measurement operators on qubit " + std::to_string(f.qubit) + " are not projectors");
        }
        if (f.projectors.size() > 10) {
            add(std::nullopt, "more than 10 outcomes on one qubit");
        }
    }
    return out;
}

inline void require_valid(const Circuit &c) {
    const auto v = validate_circuit(c);
    if (!v.empty()) {
        std::string msg = "invalid circuit: ";
        for (const auto &x : v) {
            if (x.location) {
                msg += "[location " + std::to_string(*x.location) + "] ";
            }
            msg += x.message + "; ";
        }
        throw std::invalid_argument(msg);
    }
}

// ---------------------------------------------------------------------------
// Simulation

/// What is inserted after each location's ideal operation O_j.
enum class Role {
    ideal,  // I
    fault,  // F_j = N_j - I
    full,   // N_j
};

using FaultAssignment = std::vector<Role>;

/// Noise channel per location index. Channel supports are global qubit
/// indices and must lie inside the location's support. Missing entries mean
/// the noise is trivial.
using NoiseMap = std::map<std::size_t, Channel>;

struct SimResult {
    Matrix state;   // final system state before the final measurements
    Distribution outcomes;
};

/// Outcome distribution of `final_measure` on a (possibly unnormalized) state.
inline Distribution final_distribution(const Circuit &c, const Matrix &rho) {
    if (c.final_measure.empty()) {
        return Distribution({{"", rho.trace().real()}});
    }
    std::vector<std::size_t> qubits;
    for (const auto &f : c.final_measure) {
        qubits.push_back(f.qubit);
    }
    std::vector<std::size_t> sorted = qubits;
    std::sort(sorted.begin(), sorted.end());
    const Matrix reduced = partial_trace(rho, sorted);
    // position of each final measurement within the sorted reduced space
    std::vector<std::size_t> slot(qubits.size());
    for (std::size_t k = 0; k < qubits.size(); ++k) {
        slot[k] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), qubits[k]) - sorted.begin());
    }
    std::map<std::string, double> probs;
    std::vector<std::size_t> outcome(qubits.size(), 0);
    while (true) {
        std::vector<const Matrix *> by_slot(qubits.size());
        std::string label(qubits.size(), '0');
        for (std::size_t k = 0; k < qubits.size(); ++k) {
            by_slot[slot[k]] = &c.final_measure[k].projectors[outcome[k]];
            label[k] = static_cast<char>('0' + outcome[k]);
        }
        Matrix proj = *by_slot[0];
        for (std::size_t s = 1; s < by_slot.size(); ++s) {
            proj = tensor(proj, *by_slot[s]);
        }
        probs[label] = (proj.data() * reduced.data()).trace().real();
        std::size_t k = qubits.size();
        while (k-- > 0) {
            if (++outcome[k] < c.final_measure[k].projectors.size()) {
                break;
            }
            outcome[k] = 0;
        }
        if (k == std::numeric_limits<std::size_t>::max()) {
            break;
        }
    }
    return Distribution(std::move(probs));
}

namespace detail {

inline void check_noise_locality(const Circuit &c, const NoiseMap &noise) {
    for (const auto &[idx, ch] : noise) {
        if (idx >= c.locations.size()) {
            throw std::invalid_argument("noise given for nonexistent location " + std::to_string(idx));
        }
        const auto &sup = c.locations[idx].support;
        for (std::size_t q : ch.support()) {
            if (std::find(sup.begin(), sup.end(), q) == sup.end()) {
                throw std::invalid_argument(
                    "non-local noise: channel at location " + std::to_string(idx) + " touches qubit " +
                    std::to_string(q) + " outside the location's support");
            }
        }
    }
}

inline DenseMatrix apply_kraus(const DenseMatrix &rho, const std::vector<Matrix> &kraus, const IndexSplit &split) {
    DenseMatrix out = DenseMatrix::Zero(rho.rows(), rho.cols());
    for (const auto &k : kraus) {
        out += conjugate_local(rho, k.data(), split);
    }
    return out;
}

/// Branch key: outcome per branching measurement location.
using Record = std::map<std::size_t, std::size_t>;

}  // namespace detail

/// Linear evolution of the initial state |0..0> through the circuit with the
/// insertion `roles[j]` after each location. With all roles `full` this is the
/// noisy state; with all `ideal` the ideal one. Measurements that condition
/// later gates split the state into classical branches; others dephase.
inline Matrix evolve(const Circuit &c, const NoiseMap &noise, const FaultAssignment &roles) {
    require_valid(c);
    detail::check_noise_locality(c, noise);
    if (roles.size() != c.locations.size()) {
        throw std::invalid_argument("fault assignment must give a role for every location");
    }
    const SubsystemDims dims = SubsystemDims::qubits(c.n_system);
    std::set<std::size_t> branching;
    for (const auto &l : c.locations) {
        if (l.condition) {
            branching.insert(l.condition->location);
        }
    }
    std::map<detail::Record, DenseMatrix> branches;
    branches[{}] = Matrix::basis_projector(dims, 0).data();

    for (std::size_t j = 0; j < c.locations.size(); ++j) {
        const Location &l = c.locations[j];
        const IndexSplit split(dims, l.support);
        std::map<detail::Record, DenseMatrix> next;
        for (auto &[rec, rho] : branches) {
            if (const auto *g = std::get_if<Gate>(&l.op)) {
                bool active = true;
                if (l.condition) {
                    active = rec.at(l.condition->location) == l.condition->outcome;
                }
                next[rec] = active ? conjugate_local(rho, g->unitary.data(), split) : rho;
            } else if (const auto *p = std::get_if<Prep>(&l.op)) {
                const SubsystemDims local = dims.select(l.support);
                next[rec] = detail::apply_kraus(rho, preparation_channel(local, p->state).kraus(), split);
            } else if (const auto *m = std::get_if<Measure>(&l.op)) {
                if (branching.contains(j)) {
                    for (std::size_t a = 0; a < m->projectors.size(); ++a) {
                        detail::Record r = rec;
                        r[j] = a;
                        next[r] = conjugate_local(rho, m->projectors[a].data(), split);
                    }
                } else {
                    next[rec] = detail::apply_kraus(rho, m->projectors, split);
                }
            } else {
                next[rec] = rho;
            }
        }
        auto it = noise.find(j);
        if (roles[j] != Role::ideal) {
            if (it == noise.end()) {
                if (roles[j] == Role::fault) {
                    return Matrix::zeros(dims);
                }
            } else {
                const IndexSplit nsplit(dims, it->second.support());
                for (auto &[rec, rho] : next) {
                    DenseMatrix out = detail::apply_kraus(rho, it->second.kraus(), nsplit);
                    if (roles[j] == Role::fault) {
                        out -= rho;
                    }
                    rho = std::move(out);
                }
            }
        }
        branches = std::move(next);
    }
    DenseMatrix total = DenseMatrix::Zero(static_cast<Eigen::Index>(dims.total()), static_cast<Eigen::Index>(dims.total()));
    for (const auto &[_, rho] : branches) {
        total += rho;
    }
    return Matrix(dims, std::move(total));
}

inline SimResult simulate_noisy(const Circuit &c, const NoiseMap &noise) {
    Matrix rho = evolve(c, noise, FaultAssignment(c.size(), Role::full));
    Distribution d = final_distribution(c, rho);
    return {std::move(rho), std::move(d)};
}

inline SimResult simulate_ideal(const Circuit &c) {
    Matrix rho = evolve(c, {}, FaultAssignment(c.size(), Role::ideal));
    Distribution d = final_distribution(c, rho);
    return {std::move(rho), std::move(d)};
}

// ---------------------------------------------------------------------------
// Joint system/environment evolution

/// Environment qubits follow the system qubits. couplings[j] is the unitary
/// N_j on (location j's support, in order) followed by every environment
/// qubit; it is applied right after U_j.
struct EnvironmentSpec {
    std::size_t n_env = 0;
    DenseVector initial = DenseVector::Ones(1);
    std::map<std::size_t, Matrix> couplings;
};

/// Completes the orthonormal columns of `w` to a unitary whose first columns are `w`.
inline DenseMatrix complete_unitary(const DenseMatrix &w) {
    Eigen::HouseholderQR<DenseMatrix> qr(w);
    DenseMatrix q = qr.householderQ();
    q.leftCols(w.cols()) = w;
    return q;
}

/// Unitary V on (support (x) n_env environment qubits) with
/// V |psi>|0>_E = sum_k K_k |psi> |k>_E.
inline Matrix stinespring_unitary(const Channel &ch, std::size_t n_env) {
    const std::size_t d = ch.dim();
    const std::size_t de = std::size_t{1} << n_env;
    if (ch.kraus().size() > de) {
        throw std::invalid_argument("stinespring_unitary: environment too small for the Kraus rank");
    }
    const auto D = static_cast<Eigen::Index>(d * de);
    DenseMatrix w = DenseMatrix::Zero(D, static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < ch.kraus().size(); ++k) {
        for (std::size_t a = 0; a < d; ++a) {
            for (std::size_t i = 0; i < d; ++i) {
                w(static_cast<Eigen::Index>(a * de + k), static_cast<Eigen::Index>(i)) = ch.kraus()[k](a, i);
            }
        }
    }
    const DenseMatrix q = complete_unitary(w);
    // column i of w is the image of |i>|0>, i.e. linear index i*de
    DenseMatrix u(D, D);
    Eigen::Index extra = static_cast<Eigen::Index>(d);
    for (Eigen::Index col = 0; col < D; ++col) {
        if (col % static_cast<Eigen::Index>(de) == 0) {
            u.col(col) = q.col(col / static_cast<Eigen::Index>(de));
        } else {
            u.col(col) = q.col(extra++);
        }
    }
    std::vector<std::size_t> dv = ch.dims().values();
    for (std::size_t e = 0; e < n_env; ++e) {
        dv.push_back(2);
    }
    return Matrix(SubsystemDims(std::move(dv)), std::move(u));
}

namespace detail {

inline bool commutes_locally(
    const Matrix &a, const std::vector<std::size_t> &sa, const Matrix &b, const std::vector<std::size_t> &sb) {
    const auto u = SupportUnion::of({{sa, a.dims()}, {sb, b.dims()}});
    const Matrix ea = embed_operator(a, u.positions(sa), u.dims);
    const Matrix eb = embed_operator(b, u.positions(sb), u.dims);
    return (ea * eb - eb * ea).max_abs() <= 1e-10;
}

}  // namespace detail

/// Pure-state evolution of |0..0>_QC (x) |phi0>_E with N_j inserted after each
/// U_j according to `roles`, returning the joint (unnormalized in general)
/// state vector. Preparations are only allowed on untouched qubits, where they
/// act as a unitary taking |0> to the target state. Intermediate measurements
/// are deferred to the end, which requires every later operator on the
/// measured qubits to commute with the projectors; conditioned gates must be
/// rewritten first (rewrite_conditioned_gates).
inline DenseMatrix evolve_with_environment(const Circuit &c, const EnvironmentSpec &env, const FaultAssignment &roles) {
    require_valid(c);
    if (roles.size() != c.locations.size()) {
        throw std::invalid_argument("fault assignment must give a role for every location");
    }
    if (c.n_system + env.n_env > 12) {
        throw CapExceeded("system plus environment exceeds the 12-qubit cap");
    }
    if (static_cast<std::size_t>(env.initial.size()) != (std::size_t{1} << env.n_env)) {
        throw std::invalid_argument("environment initial state has the wrong dimension");
    }
    if (std::abs(env.initial.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("environment initial state is not normalized");
    }
    std::vector<std::size_t> env_qubits(env.n_env);
    std::iota(env_qubits.begin(), env_qubits.end(), c.n_system);
    const SubsystemDims dims = SubsystemDims::qubits(c.n_system + env.n_env);

    auto coupling_support = [&](std::size_t j) {
        std::vector<std::size_t> s = c.locations[j].support;
        s.insert(s.end(), env_qubits.begin(), env_qubits.end());
        return s;
    };
    for (const auto &[j, n] : env.couplings) {
        if (j >= c.locations.size()) {
            throw std::invalid_argument("coupling given for nonexistent location " + std::to_string(j));
        }
        if (n.dim() != (std::size_t{1} << (c.locations[j].support.size() + env.n_env))) {
            throw std::invalid_argument("coupling at location " + std::to_string(j) + " has the wrong dimension");
        }
        if (!is_unitary(n)) {
            throw std::invalid_argument("coupling at location " + std::to_string(j) + " is not unitary");
        }
    }

    // Deferred measurements must commute with everything that follows on their qubits.
    for (std::size_t m = 0; m < c.locations.size(); ++m) {
        const auto *meas = std::get_if<Measure>(&c.locations[m].op);
        if (meas == nullptr) {
            continue;
        }
        const auto &ms = c.locations[m].support;
        auto touches = [&](const std::vector<std::size_t> &s) {
            return std::any_of(s.begin(), s.end(), [&](std::size_t q) { return std::find(ms.begin(), ms.end(), q) != ms.end(); });
        };
        auto check = [&](const Matrix &op, const std::vector<std::size_t> &s, const std::string &what) {
            for (const auto &p : meas->projectors) {
                if (!detail::commutes_locally(p, ms, op, s)) {
                    throw std::invalid_argument(
                        "measurement at location " + std::to_string(m) + " cannot be deferred past " + what);
                }
            }
        };
        for (std::size_t j = m; j < c.locations.size(); ++j) {
            const Location &l = c.locations[j];
            if (j > m && touches(l.support)) {
                if (const auto *g = std::get_if<Gate>(&l.op)) {
                    check(g->unitary, l.support, "gate at location " + std::to_string(j));
                } else if (!std::holds_alternative<Idle>(l.op) && !std::holds_alternative<Measure>(l.op)) {
                    throw std::invalid_argument(
                        "measurement at location " + std::to_string(m) + " is followed by a preparation on the same qubit");
                }
            }
            auto it = env.couplings.find(j);
            if (it != env.couplings.end() && touches(l.support)) {
                check(it->second, coupling_support(j), "the coupling at location " + std::to_string(j));
            }
        }
    }

    DenseMatrix psi(static_cast<Eigen::Index>(dims.total()), 1);
    psi.col(0) = tensor(basis_state(std::size_t{1} << c.n_system, 0), DenseVector(env.initial));
    std::vector<bool> touched(c.n_system, false);
    for (std::size_t j = 0; j < c.locations.size(); ++j) {
        const Location &l = c.locations[j];
        if (l.condition) {
            throw std::invalid_argument("unresolved condition at location " + std::to_string(j) + "; rewrite it first");
        }
        const IndexSplit split(dims, l.support);
        if (const auto *g = std::get_if<Gate>(&l.op)) {
            apply_local_left(psi, g->unitary.data(), split);
        } else if (const auto *p = std::get_if<Prep>(&l.op)) {
            for (std::size_t q : l.support) {
                if (touched[q]) {
                    throw std::invalid_argument(
                        "preparation at location " + std::to_string(j) + " acts on a qubit that is no longer fresh");
                }
            }
            apply_local_left(psi, complete_unitary(DenseMatrix(p->state)), split);
        }
        for (std::size_t q : l.support) {
            touched[q] = true;
        }
        auto it = env.couplings.find(j);
        if (roles[j] == Role::ideal) {
            continue;
        }
        if (it == env.couplings.end()) {
            if (roles[j] == Role::fault) {
                psi.setZero();
                return psi;
            }
            continue;
        }
        DenseMatrix before = psi;
        apply_local_left(psi, it->second.data(), IndexSplit(dims, coupling_support(j)));
        if (roles[j] == Role::fault) {
            psi -= before;
        }
    }
    return psi;
}

namespace detail {

/// Reduced system state of a joint vector, with deferred measurements applied.
inline Matrix system_state(const Circuit &c, std::size_t n_env, const DenseMatrix &psi) {
    const SubsystemDims dims = SubsystemDims::qubits(c.n_system + n_env);
    std::vector<std::size_t> sys(c.n_system);
    std::iota(sys.begin(), sys.end(), std::size_t{0});
    Matrix rho = partial_trace(Matrix(dims, psi * psi.adjoint()), sys);
    const SubsystemDims sdims = SubsystemDims::qubits(c.n_system);
    for (const auto &l : c.locations) {
        if (const auto *m = std::get_if<Measure>(&l.op)) {
            rho = Matrix(sdims, apply_kraus(rho.data(), m->projectors, IndexSplit(sdims, l.support)));
        }
    }
    return rho;
}

}  // namespace detail

inline SimResult simulate_with_environment(const Circuit &c, const EnvironmentSpec &env) {
    const DenseMatrix psi = evolve_with_environment(c, env, FaultAssignment(c.size(), Role::full));
    Matrix rho = detail::system_state(c, env.n_env, psi);
    Distribution d = final_distribution(c, rho);
    return {std::move(rho), std::move(d)};
}

// ---------------------------------------------------------------------------
// Conditioned-gate rewrite

/// Replaces each gate conditioned on a single-qubit measurement in basis
/// {|b0>, |b1>} by: V on the measured qubit (V|b_a> = |a>) at the measurement
/// location, the controlled gate Lambda_v(U) on (measured qubit, support) at
/// the gate's location, and a Z-basis measurement placed in a new step right
/// after the last gate conditioned on that measurement. Steps are renumbered
/// (s -> 2s) to make room for the inserted measurements. The measured qubit
/// may not be reused afterwards; its final-measurement projectors P become
/// V P V^dag so the outcome distribution is unchanged.
inline Circuit rewrite_conditioned_gates(const Circuit &c) {
    require_valid(c);
    std::map<std::size_t, std::vector<std::size_t>> users;  // measurement -> conditioned gates
    for (std::size_t j = 0; j < c.locations.size(); ++j) {
        if (c.locations[j].condition) {
            users[c.locations[j].condition->location].push_back(j);
        }
    }
    if (users.empty()) {
        return c;
    }
    std::map<std::size_t, DenseMatrix> basis_change;  // measurement -> V
    for (const auto &[m, gates_using] : users) {
        const Location &ml = c.locations[m];
        const auto &meas = std::get<Measure>(ml.op);
        if (ml.support.size() != 1 || meas.projectors.size() != 2) {
            throw std::invalid_argument("condition on location " + std::to_string(m) + " is not a single-qubit two-outcome measurement");
        }
        DenseMatrix v(2, 2);
        for (std::size_t a = 0; a < 2; ++a) {
            const auto eig = hermitian_eigen(meas.projectors[a].data());
            if (std::abs(eig.values(1) - 1.0) > 1e-10 || std::abs(eig.values(0)) > 1e-10) {
                throw std::invalid_argument("measurement at location " + std::to_string(m) + " is not in an orthonormal basis");
            }
            v.row(static_cast<Eigen::Index>(a)) = eig.vectors.col(1).adjoint();
        }
        basis_change[m] = v;
        const std::size_t q = ml.support[0];
        for (std::size_t j = m + 1; j < c.locations.size(); ++j) {
            const auto &s = c.locations[j].support;
            const bool is_user = std::find(gates_using.begin(), gates_using.end(), j) != gates_using.end();
            if (!is_user && std::find(s.begin(), s.end(), q) != s.end()) {
                throw std::invalid_argument(
                    "qubit " + std::to_string(q) + " is reused after measurement " + std::to_string(m) +
                    ", which the rewrite does not support");
            }
        }
        for (std::size_t j : gates_using) {
            const auto &s = c.locations[j].support;
            if (std::find(s.begin(), s.end(), q) != s.end()) {
                throw std::invalid_argument("conditioned gate acts on its own control qubit");
            }
        }
    }

    Circuit out;
    out.n_system = c.n_system;
    out.final_measure = c.final_measure;
    for (auto &f : out.final_measure) {
        for (const auto &[m, v] : basis_change) {
            if (c.locations[m].support[0] == f.qubit) {
                for (auto &p : f.projectors) {
                    p = Matrix({2}, v * p.data() * v.adjoint());
                }
            }
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> pending;  // gate index -> measurements to place after it
    for (const auto &[m, gates_using] : users) {
        pending[gates_using.back()].push_back(m);
    }
    for (std::size_t j = 0; j < c.locations.size(); ++j) {
        const Location &l = c.locations[j];
        Location nl = l;
        nl.step = 2 * l.step;
        nl.condition.reset();
        if (auto it = basis_change.find(j); it != basis_change.end()) {
            nl.op = Gate{Matrix({2}, it->second)};
        } else if (l.condition) {
            const std::size_t q = c.locations[l.condition->location].support[0];
            const std::size_t v = l.condition->outcome;
            const Matrix &u = std::get<Gate>(l.op).unitary;
            const Matrix on = Matrix::basis_projector({2}, v);
            const Matrix off = Matrix::basis_projector({2}, 1 - v);
            const Matrix controlled = tensor(on, u) + tensor(off, Matrix::identity(u.dims()));
            nl.op = Gate{controlled.relabel(SubsystemDims::qubits(l.support.size() + 1))};
            nl.support.insert(nl.support.begin(), q);
        }
        out.locations.push_back(std::move(nl));
        if (auto it = pending.find(j); it != pending.end()) {
            for (std::size_t m : it->second) {
                out.locations.push_back(loc::measure(2 * l.step + 1, c.locations[m].support[0]));
            }
        }
    }
    require_valid(out);
    return out;
}

}  // namespace ftlab

#endif  // FTLAB_CIRCUIT_HPP
