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

#ifndef FTLAB_CHANNELS_HPP
#define FTLAB_CHANNELS_HPP

/// \file channels.hpp
/// Quantum channels in Kraus form, diamond-distance bounds, the noise-model
/// zoo and its strength evaluators.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ftlab/matcore.hpp"
#include "ftlab/parallel.hpp"

namespace ftlab {

/// Completely positive trace-preserving map given by Kraus operators that act
/// on the subsystems listed in `support` (indices into whatever space the
/// channel is later applied to).
class Channel {
   public:
    Channel(std::vector<Matrix> kraus, std::vector<std::size_t> support) : kraus_(std::move(kraus)), support_(std::move(support)) {
        if (kraus_.empty()) {
            throw std::invalid_argument("channel needs at least one Kraus operator");
        }
        const SubsystemDims &d = kraus_.front().dims();
        for (const auto &k : kraus_) {
            if (!(k.dims() == d)) {
                throw std::invalid_argument("Kraus operators have different dims");
            }
        }
        if (support_.size() != d.size()) {
            throw std::invalid_argument("channel support size does not match Kraus subsystem count");
        }
        if (std::set<std::size_t>(support_.begin(), support_.end()).size() != support_.size()) {
            throw std::invalid_argument("channel support has repeated indices");
        }
        if (tp_defect() > 1e-10) {
            throw std::invalid_argument("channel is not trace preserving (sum K^dag K != I)");
        }
    }
    /// Channel acting on subsystems 0..n-1 of its own Kraus dims.
    explicit Channel(const std::vector<Matrix> &kraus)
        : Channel(kraus, iota_support(kraus.empty() ? 0 : kraus.front().dims().size())) {}

    const std::vector<Matrix> &kraus() const { return kraus_; }
    const std::vector<std::size_t> &support() const { return support_; }
    const SubsystemDims &dims() const { return kraus_.front().dims(); }
    std::size_t dim() const { return dims().total(); }

    double tp_defect() const {
        DenseMatrix s = DenseMatrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
        for (const auto &k : kraus_) {
            s += k.data().adjoint() * k.data();
        }
        s -= DenseMatrix::Identity(s.rows(), s.cols());
        return s.cwiseAbs().maxCoeff();
    }

    /// Same Kraus operators, relabelled to act on `support`.
    Channel at(std::vector<std::size_t> support) const { return Channel(kraus_, std::move(support)); }

   private:
    static std::vector<std::size_t> iota_support(std::size_t n) {
        std::vector<std::size_t> s(n);
        std::iota(s.begin(), s.end(), std::size_t{0});
        return s;
    }

    std::vector<Matrix> kraus_;
    std::vector<std::size_t> support_;
};

inline Channel identity_channel(const SubsystemDims &dims) { return Channel({Matrix::identity(dims)}); }

inline Channel unitary_channel(const Matrix &u) {
    if (!is_unitary(u)) {
        throw std::invalid_argument("unitary_channel: operator is not unitary");
    }
    return Channel({u});
}

/// Replaces the input with |psi><psi| (psi normalized by the caller).
inline Channel preparation_channel(const SubsystemDims &dims, const DenseVector &psi) {
    std::vector<Matrix> kraus;
    const auto n = static_cast<Eigen::Index>(dims.total());
    for (Eigen::Index i = 0; i < n; ++i) {
        DenseMatrix k = DenseMatrix::Zero(n, n);
        k.col(i) = psi;
        kraus.emplace_back(dims, std::move(k));
    }
    return Channel(std::move(kraus));
}

/// Non-selective projective measurement: X -> sum_a M_a X M_a.
inline Channel measurement_channel(const std::vector<Matrix> &projectors) { return Channel(projectors); }

inline Channel completely_depolarizing_channel() {
    std::vector<Matrix> k;
    for (const auto &p : {gates::I(), gates::X(), gates::Y(), gates::Z()}) {
        k.push_back(p * cplx(0.5));
    }
    return Channel(std::move(k));
}

/// Applies `ch` to `rho`; the channel's support indexes `rho`'s subsystems.
inline Matrix apply_channel(const Channel &ch, const Matrix &rho) {
    if (!(rho.dims().select(ch.support()) == ch.dims())) {
        throw std::invalid_argument("apply_channel: channel dims do not match the state's support dims");
    }
    const IndexSplit split(rho.dims(), ch.support());
    DenseMatrix out = DenseMatrix::Zero(rho.data().rows(), rho.data().cols());
    for (const auto &k : ch.kraus()) {
        out += conjugate_local(rho.data(), k.data(), split);
    }
    return Matrix(rho.dims(), std::move(out));
}

namespace detail {

/// Union of the supports of several local operators, with subsystem dims
/// looked up from whichever operator mentions each index.
struct SupportUnion {
    std::vector<std::size_t> support;  // sorted
    SubsystemDims dims;

    static SupportUnion of(const std::vector<std::pair<std::vector<std::size_t>, SubsystemDims>> &parts) {
        std::map<std::size_t, std::size_t> d;
        for (const auto &[sup, dims] : parts) {
            for (std::size_t i = 0; i < sup.size(); ++i) {
                auto [it, inserted] = d.emplace(sup[i], dims[i]);
                if (!inserted && it->second != dims[i]) {
                    throw std::invalid_argument("subsystem " + std::to_string(sup[i]) + " given inconsistent dims");
                }
            }
        }
        SupportUnion u;
        std::vector<std::size_t> dv;
        for (const auto &[idx, dim] : d) {
            u.support.push_back(idx);
            dv.push_back(dim);
        }
        u.dims = SubsystemDims(std::move(dv));
        return u;
    }

    std::vector<std::size_t> positions(const std::vector<std::size_t> &sup) const {
        std::vector<std::size_t> pos;
        for (std::size_t s : sup) {
            pos.push_back(static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), s) - support.begin()));
        }
        return pos;
    }
};

}  // namespace detail

/// Lifts `ch` to act on all of `total`, as identity outside its support.
inline Channel embed_channel(const Channel &ch, const SubsystemDims &total) {
    std::vector<Matrix> kraus;
    kraus.reserve(ch.kraus().size());
    for (const auto &k : ch.kraus()) {
        kraus.push_back(embed_operator(k, ch.support(), total));
    }
    return Channel(std::move(kraus));
}

/// `later` after `earlier`. When supports differ both are first embedded into
/// the union of their supports, which becomes the result's support.
inline Channel compose_channels(const Channel &later, const Channel &earlier) {
    if (later.support() == earlier.support()) {
        std::vector<Matrix> kraus;
        for (const auto &a : later.kraus()) {
            for (const auto &b : earlier.kraus()) {
                kraus.push_back(a * b);
            }
        }
        return Channel(std::move(kraus), later.support());
    }
    const auto u = detail::SupportUnion::of({{later.support(), later.dims()}, {earlier.support(), earlier.dims()}});
    const Channel a = embed_channel(later.at(u.positions(later.support())), u.dims);
    const Channel b = embed_channel(earlier.at(u.positions(earlier.support())), u.dims);
    return compose_channels(a, b).at(u.support);
}

/// Unnormalized Choi matrix sum_ij ch(|i><j|) (x) |i><j|, output first.
inline Matrix choi_matrix(const Channel &ch) {
    const auto d = static_cast<Eigen::Index>(ch.dim());
    const SubsystemDims dims = ch.dims().concat(ch.dims());
    DenseMatrix j = DenseMatrix::Zero(d * d, d * d);
    DenseVector v(d * d);
    for (const auto &k : ch.kraus()) {
        for (Eigen::Index a = 0; a < d; ++a) {
            for (Eigen::Index i = 0; i < d; ++i) {
                v(a * d + i) = k.data()(a, i);
            }
        }
        j += v * v.adjoint();
    }
    return Matrix(dims, std::move(j));
}

struct DiamondBounds {
    double lower = 0;
    double upper = 0;
};

struct DiamondOptions {
    std::size_t restarts = 32;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t max_iterations = 500;
};

namespace detail {

/// ((a - b) (x) I)(|psi><psi|) for psi on system (x) reference.
inline DenseMatrix difference_output(const Channel &a, const Channel &b, const DenseVector &psi) {
    const auto d = static_cast<Eigen::Index>(a.dim());
    DenseMatrix psi_mat = Eigen::Map<const DenseMatrix>(psi.data(), d, d).transpose();  // row: system, col: ref
    DenseMatrix x = DenseMatrix::Zero(d * d, d * d);
    auto accumulate = [&](const Channel &ch, double sign) {
        for (const auto &k : ch.kraus()) {
            DenseMatrix kpsi = k.data() * psi_mat;
            DenseVector v = Eigen::Map<const DenseVector>(DenseMatrix(kpsi.transpose()).data(), d * d);
            x += sign * (v * v.adjoint());
        }
    };
    accumulate(a, 1.0);
    accumulate(b, -1.0);
    return x;
}

/// Adjoint of ((a - b) (x) I) applied to Hermitian S.
inline DenseMatrix difference_adjoint(const Channel &a, const Channel &b, const DenseMatrix &s) {
    const auto d = static_cast<Eigen::Index>(a.dim());
    DenseMatrix g = DenseMatrix::Zero(d * d, d * d);
    const DenseMatrix id = DenseMatrix::Identity(d, d);
    auto accumulate = [&](const Channel &ch, double sign) {
        for (const auto &k : ch.kraus()) {
            DenseMatrix kk(d * d, d * d);
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    kk.block(i * d, j * d, d, d) = k.data()(i, j) * id;
                }
            }
            g += sign * (kk.adjoint() * s * kk);
        }
    };
    accumulate(a, 1.0);
    accumulate(b, -1.0);
    return g;
}

struct AscentPoint {
    double value;
    DenseMatrix sign;  // sign(X) at this point
};

inline AscentPoint evaluate(const Channel &a, const Channel &b, const DenseVector &psi) {
    const auto eig = hermitian_eigen(difference_output(a, b, psi));
    Eigen::VectorXd sgn(eig.values.size());
    double value = 0;
    for (Eigen::Index i = 0; i < sgn.size(); ++i) {
        value += std::abs(eig.values(i));
        sgn(i) = eig.values(i) >= 0 ? 1.0 : -1.0;
    }
    return {value, eig.vectors * sgn.asDiagonal() * eig.vectors.adjoint()};
}

/// Local maximization of ||((a-b) (x) I)(psi psi^dag)||_1 over unit psi.
///
/// Each iteration linearizes the trace norm at the current sign matrix S and
/// moves along the projected gradient G psi - <G> psi. The first trial step is
/// the infinite-step limit (top eigenvector of G), which never decreases the
/// objective; if it stalls, finite steps are halved until one improves.
inline double ascend(const Channel &a, const Channel &b, DenseVector psi, const DiamondOptions &opt) {
    psi.normalize();
    AscentPoint cur = evaluate(a, b, psi);
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        const DenseMatrix g = difference_adjoint(a, b, cur.sign);
        const auto eig = hermitian_eigen(g);
        DenseVector cand = eig.vectors.col(eig.vectors.cols() - 1);
        AscentPoint next = evaluate(a, b, cand);
        if (!(next.value > cur.value)) {
            const DenseVector grad = g * psi - psi.dot(g * psi) * psi;
            bool improved = false;
            for (double step = 1.0; step > 1e-12; step *= 0.5) {
                cand = (psi + step * grad).normalized();
                next = evaluate(a, b, cand);
                if (next.value > cur.value) {
                    improved = true;
                    break;
                }
            }
            if (!improved) {
                break;
            }
        }
        const double change = next.value - cur.value;
        psi = cand;
        cur = std::move(next);
        if (change <= 1e-10 * std::max(cur.value, 1e-300)) {
            break;
        }
    }
    return cur.value;
}

inline std::pair<Channel, Channel> align(const Channel &a, const Channel &b) {
    if (a.support() == b.support()) {
        if (!(a.dims() == b.dims())) {
            throw std::invalid_argument("channels act on spaces of different dims");
        }
        return {a, b};
    }
    const auto u = SupportUnion::of({{a.support(), a.dims()}, {b.support(), b.dims()}});
    return {embed_channel(a.at(u.positions(a.support())), u.dims), embed_channel(b.at(u.positions(b.support())), u.dims)};
}

}  // namespace detail

/// Certified interval for ||a - b||_diamond.
///
/// lower: best value found by restarted ascent over pure states on system (x)
/// reference with reference dim = input dim. Restart 0 starts from the
/// maximally entangled state, the rest from Gaussian random states seeded by
/// (seed, restart).
///
/// upper: 2 ||Tr_out J_+||_inf, where J_+ is the positive part of the Choi
/// difference; J_+ is a feasible point of the dual SDP for a
/// trace-annihilating difference of channels. Also clipped by ||J||_1 and 2.
inline DiamondBounds diamond_distance(const Channel &a0, const Channel &b0, const DiamondOptions &opt = {}) {
    if (opt.restarts == 0) {
        throw std::invalid_argument("diamond_distance: restarts must be >= 1");
    }
    const auto [a, b] = detail::align(a0, b0);
    const auto d = static_cast<Eigen::Index>(a.dim());

    const Matrix j = choi_matrix(a) - choi_matrix(b);
    DiamondBounds out;
    if (j.max_abs() == 0.0) {
        return out;
    }
    const auto eig = hermitian_eigen(j.data());
    DenseMatrix jplus = DenseMatrix::Zero(j.data().rows(), j.data().cols());
    double choi_norm = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        choi_norm += std::abs(eig.values(i));
        if (eig.values(i) > 0) {
            jplus += eig.values(i) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
        }
    }
    std::vector<std::size_t> ref(a.dims().size());
    std::iota(ref.begin(), ref.end(), a.dims().size());
    const Matrix reduced = partial_trace(Matrix(j.dims(), jplus), ref);
    const double dual = 2.0 * hermitian_eigenvalues(reduced).maxCoeff();
    out.upper = std::min({2.0, dual, choi_norm});

    std::vector<double> best(opt.restarts, 0.0);
    parallel_for(opt.restarts, opt.workers, [&](std::size_t r) {
        DenseVector psi(d * d);
        if (r == 0) {
            psi.setZero();
            for (Eigen::Index i = 0; i < d; ++i) {
                psi(i * d + i) = 1.0;
            }
        } else {
            Rng rng(derive_seed(opt.seed, r));
            std::normal_distribution<double> normal;
            for (Eigen::Index i = 0; i < psi.size(); ++i) {
                psi(i) = cplx(normal(rng), normal(rng));
            }
        }
        best[r] = detail::ascend(a, b, psi, opt);
    });
    out.lower = *std::max_element(best.begin(), best.end());
    if (out.lower > out.upper + opt.tol) {
        throw std::logic_error("diamond_distance: lower bound exceeds certified upper bound");
    }
    out.lower = std::min(out.lower, out.upper);
    return out;
}

// ---------------------------------------------------------------------------
// Noise-model zoo

struct ControlRotation {
    double delta_theta = 0;  // radians
};
struct AmplitudeDamping {
    double t0 = 0;
    double T1 = 1;
    double gamma() const { return 1.0 - std::exp(-t0 / T1); }
};
struct Probabilistic {
    double p = 0;
    Matrix E = gates::X();
};
struct Depolarizing {
    double p = 0;
    std::size_t n_qubits = 1;
};

using NoiseSpec = std::variant<ControlRotation, AmplitudeDamping, Probabilistic, Depolarizing>;

namespace detail {

inline std::vector<Matrix> pauli_strings(std::size_t n) {
    std::vector<Matrix> out{Matrix()};
    const std::array<Matrix, 4> single{gates::I(), gates::X(), gates::Y(), gates::Z()};
    for (std::size_t q = 0; q < n; ++q) {
        std::vector<Matrix> next;
        for (const auto &m : out) {
            for (const auto &p : single) {
                next.push_back(q == 0 ? p : tensor(m, p));
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace detail

inline Channel make_noise_channel(const NoiseSpec &spec) {
    struct Visitor {
        Channel operator()(const ControlRotation &c) const {
            if (!std::isfinite(c.delta_theta)) {
                throw std::invalid_argument("control_rotation: delta_theta must be finite");
            }
            // exp(i dtheta sigma_z)
            return Channel({gates::from_rows(
                {2}, {{std::exp(gates::kI * c.delta_theta), 0}, {0, std::exp(-gates::kI * c.delta_theta)}})});
        }
        Channel operator()(const AmplitudeDamping &a) const {
            if (!(a.t0 >= 0) || !(a.T1 > 0) || !std::isfinite(a.t0) || !std::isfinite(a.T1)) {
                throw std::invalid_argument("amplitude_damping: need t0 >= 0 and T1 > 0");
            }
            const double g = a.gamma();
            const double s = std::sqrt(1.0 - g);
            const Matrix i2 = gates::I();
            const Matrix z = gates::Z();
            const Matrix m0 = i2 * cplx((1 + s) / 2) + z * cplx((1 - s) / 2);
            const Matrix m1 = gates::X() * (i2 - z) * cplx(std::sqrt(g) / 2);
            return Channel({m0, m1});
        }
        Channel operator()(const Probabilistic &p) const {
            if (!(p.p >= 0 && p.p <= 1)) {
                throw std::invalid_argument("probabilistic: p must lie in [0, 1]");
            }
            if (!is_unitary(p.E)) {
                throw std::invalid_argument("probabilistic: E must satisfy E^dag E = I");
            }
            return Channel({Matrix::identity(p.E.dims()) * cplx(std::sqrt(1 - p.p)), p.E * cplx(std::sqrt(p.p))});
        }
        Channel operator()(const Depolarizing &d) const {
            if (!(d.p >= 0 && d.p <= 1)) {
                throw std::invalid_argument("depolarizing: p must lie in [0, 1]");
            }
            if (d.n_qubits == 0 || d.n_qubits > 6) {
                throw std::invalid_argument("depolarizing: n_qubits must be in 1..6");
            }
            auto paulis = detail::pauli_strings(d.n_qubits);
            const double rest = d.p / static_cast<double>(paulis.size() - 1);
            std::vector<Matrix> kraus;
            kraus.push_back(paulis[0] * cplx(std::sqrt(1 - d.p)));
            for (std::size_t i = 1; i < paulis.size(); ++i) {
                kraus.push_back(paulis[i] * cplx(std::sqrt(rest)));
            }
            return Channel(std::move(kraus));
        }
    };
    return std::visit(Visitor{}, spec);
}

/// How strength_markovian relates the noisy operation to the ideal one.
enum class StrengthMode {
    decompose,  // noisy = N o ideal with ideal a unitary; measures ||N - I||
    direct,     // preparations/measurements: ||noisy - ideal||
};

/// Diamond-norm upper bound on ||N - I|| (or ||noisy - ideal|| in direct mode).
inline double strength_markovian(
    const Channel &noisy, const Channel &ideal, StrengthMode mode = StrengthMode::decompose, const DiamondOptions &opt = {}) {
    if (mode == StrengthMode::direct) {
        return diamond_distance(noisy, ideal, opt).upper;
    }
    if (ideal.kraus().size() != 1 || !is_unitary(ideal.kraus().front())) {
        throw std::invalid_argument("strength_markovian: ideal operation is not an invertible unitary channel");
    }
    const Channel undo(std::vector<Matrix>{ideal.kraus().front().adjoint()}, ideal.support());
    const Channel n = compose_channels(noisy, undo);
    return diamond_distance(n, identity_channel(n.dims()).at(n.support()), opt).upper;
}

/// ||N - I||_diamond upper bound for a noise channel applied after its ideal operation.
inline double noise_strength(const Channel &noise, const DiamondOptions &opt = {}) {
    return diamond_distance(noise, identity_channel(noise.dims()).at(noise.support()), opt).upper;
}

// ---------------------------------------------------------------------------
// Non-Markovian strength evaluators

struct HamiltonianTerm {
    std::vector<std::size_t> support;
    Matrix op;
    std::string label;
    std::optional<std::array<std::size_t, 2>> pair;
};

namespace detail {

inline Matrix summed_term(const std::vector<const HamiltonianTerm *> &terms) {
    std::vector<std::pair<std::vector<std::size_t>, SubsystemDims>> parts;
    for (const auto *t : terms) {
        parts.emplace_back(t->support, t->op.dims());
    }
    const auto u = SupportUnion::of(parts);
    Matrix sum = Matrix::zeros(u.dims);
    for (const auto *t : terms) {
        sum += embed_operator(t->op, u.positions(t->support), u.dims);
    }
    return sum;
}

inline void check_hermitian_terms(const std::vector<HamiltonianTerm> &terms) {
    if (terms.empty()) {
        throw std::invalid_argument("no Hamiltonian terms given");
    }
    for (const auto &t : terms) {
        if (!is_hermitian(t.op, 1e-12)) {
            throw std::invalid_argument("Hamiltonian term '" + t.label + "' is not Hermitian");
        }
        if (t.support.size() != t.op.dims().size()) {
            throw std::invalid_argument("Hamiltonian term '" + t.label + "' support does not match its dims");
        }
    }
}

}  // namespace detail

/// t0 * max_j ||sum of the terms labelled j||_inf. Leakage noise uses the same
/// evaluator with qutrit (or larger) subsystem dims.
inline double strength_local_hamiltonian(const std::vector<HamiltonianTerm> &terms, double t0) {
    detail::check_hermitian_terms(terms);
    std::map<std::string, std::vector<const HamiltonianTerm *>> groups;
    for (const auto &t : terms) {
        groups[t.label].push_back(&t);
    }
    double worst = 0;
    for (const auto &[_, group] : groups) {
        worst = std::max(worst, operator_norm(detail::summed_term(group)));
    }
    return t0 * worst;
}

struct LongRangeStrength {
    double epsilon = 0;
    bool valid = true;  // the formula's side condition epsilon^2 <= e
};

/// sqrt(c t0 max_j sum_k ||H_(j,k)||_inf); terms sharing a pair are summed first.
inline LongRangeStrength strength_long_range(const std::vector<HamiltonianTerm> &pair_terms, double t0, double c = 2 * std::numbers::e) {
    detail::check_hermitian_terms(pair_terms);
    if (!(c > 0)) {
        throw std::invalid_argument("strength_long_range: c must be positive");
    }
    std::map<std::array<std::size_t, 2>, std::vector<const HamiltonianTerm *>> pairs;
    for (const auto &t : pair_terms) {
        if (!t.pair) {
            throw std::invalid_argument("long-range term '" + t.label + "' has no (j, k) pair");
        }
        auto key = *t.pair;
        if (key[0] > key[1]) {
            std::swap(key[0], key[1]);
        }
        pairs[key].push_back(&t);
    }
    std::map<std::size_t, double> per_qubit;
    for (const auto &[key, group] : pairs) {
        const double n = operator_norm(detail::summed_term(group));
        per_qubit[key[0]] += n;
        if (key[1] != key[0]) {
            per_qubit[key[1]] += n;
        }
    }
    double worst = 0;
    for (const auto &[_, s] : per_qubit) {
        worst = std::max(worst, s);
    }
    LongRangeStrength out;
    out.epsilon = std::sqrt(c * t0 * worst);
    out.valid = out.epsilon * out.epsilon <= std::numbers::e;
    return out;
}

/// |Delta(1,2)| sampled on spacetime cells x field labels (the three Pauli
/// indices by default). Row/column index of (cell, m) is cell * labels + m.
struct CorrelationGrid {
    std::size_t cells = 0;
    std::size_t labels = 3;
    Eigen::MatrixXd delta_abs;
    double cell_volume = 1;
    std::vector<std::vector<std::size_t>> gate_regions;
};

/// sqrt(c max_j sum_{cells of U_j} sum_{cells of all regions} sum_{m1,m2} |Delta| vol^2).
/// Plain Riemann sum: refining the grid is up to the caller.
inline double strength_gaussian(const CorrelationGrid &grid, double c) {
    const auto n = static_cast<Eigen::Index>(grid.cells * grid.labels);
    if (grid.delta_abs.rows() != n || grid.delta_abs.cols() != n) {
        throw std::invalid_argument("strength_gaussian: delta_abs shape does not match cells x labels");
    }
    if (grid.gate_regions.empty()) {
        throw std::invalid_argument("strength_gaussian: no gate regions");
    }
    if ((grid.delta_abs.array() < 0).any()) {
        throw std::invalid_argument("strength_gaussian: |Delta| entries must be non-negative");
    }
    std::set<std::size_t> all;
    for (const auto &region : grid.gate_regions) {
        if (region.empty()) {
            throw std::invalid_argument("strength_gaussian: empty gate region");
        }
        for (std::size_t cell : region) {
            if (cell >= grid.cells) {
                throw std::out_of_range("strength_gaussian: cell index out of range");
            }
            all.insert(cell);
        }
    }
    const auto L = static_cast<Eigen::Index>(grid.labels);
    double worst = 0;
    for (const auto &region : grid.gate_regions) {
        const std::set<std::size_t> own(region.begin(), region.end());
        double mass = 0;
        for (std::size_t c1 : own) {
            for (std::size_t c2 : all) {
                mass += grid.delta_abs.block(static_cast<Eigen::Index>(c1) * L, static_cast<Eigen::Index>(c2) * L, L, L).sum();
            }
        }
        worst = std::max(worst, mass * grid.cell_volume * grid.cell_volume);
    }
    return std::sqrt(c * worst);
}

/// ||N - I||_inf: the non-Markovian strength of a joint system/environment
/// unitary evaluated at the trivial choice I_QC = I. This upper-bounds the
/// minimum over all I_QC acting only on the environment.
inline double strength_unitary_coupling(const Matrix &n) {
    return operator_norm(n - Matrix::identity(n.dims()));
}

}  // namespace ftlab

#endif  // FTLAB_CHANNELS_HPP
