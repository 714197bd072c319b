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

#ifndef FTLAB_MATCORE_HPP
#define FTLAB_MATCORE_HPP

/// \file matcore.hpp
/// Dense complex linear algebra over labeled tensor-product subsystems.
///
/// Subsystem 0 is the most significant factor of a row-major linear index,
/// so `tensor(a, b)` places `a`'s subsystems before `b`'s.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ftlab {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

/// Largest total Hilbert-space dimension any Matrix may carry (12 qubits).
inline constexpr std::size_t kMaxTotalDim = std::size_t{1} << 12;

/// Thrown when a request exceeds a dimension, enumeration or sampling cap.
class CapExceeded : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class SubsystemDims {
   public:
    SubsystemDims() = default;
    SubsystemDims(std::initializer_list<std::size_t> dims) : SubsystemDims(std::vector<std::size_t>(dims)) {}
    explicit SubsystemDims(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
        std::size_t total = 1;
        for (std::size_t d : dims_) {
            if (d < 2) {
                throw std::invalid_argument("subsystem dimension must be at least 2");
            }
            total *= d;
            if (total > kMaxTotalDim) {
                throw CapExceeded("total dimension exceeds cap of " + std::to_string(kMaxTotalDim));
            }
        }
    }

    static SubsystemDims qubits(std::size_t n) { return SubsystemDims(std::vector<std::size_t>(n, 2)); }

    std::size_t size() const { return dims_.size(); }
    bool empty() const { return dims_.empty(); }
    std::size_t operator[](std::size_t i) const { return dims_.at(i); }
    const std::vector<std::size_t> &values() const { return dims_; }

    std::size_t total() const {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
    }

    /// Row-major stride of each subsystem.
    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(dims_.size(), 1);
        for (std::size_t i = dims_.size(); i-- > 1;) {
            s[i - 1] = s[i] * dims_[i];
        }
        return s;
    }

    SubsystemDims concat(const SubsystemDims &other) const {
        std::vector<std::size_t> d = dims_;
        d.insert(d.end(), other.dims_.begin(), other.dims_.end());
        return SubsystemDims(std::move(d));
    }

    SubsystemDims select(std::span<const std::size_t> indices) const {
        std::vector<std::size_t> d;
        d.reserve(indices.size());
        for (std::size_t i : indices) {
            if (i >= dims_.size()) {
                throw std::out_of_range("subsystem index " + std::to_string(i) + " out of range");
            }
            d.push_back(dims_[i]);
        }
        return SubsystemDims(std::move(d));
    }

    bool operator==(const SubsystemDims &) const = default;

   private:
    std::vector<std::size_t> dims_;
};

/// Offsets that split a linear index into (selected subsystems, the rest).
///
/// For any selected configuration `a` and remaining configuration `r`, the
/// full linear index is `inner[a] + outer[r]`. `inner` enumerates the selected
/// subsystems in the order given (first most significant).
struct IndexSplit {
    std::vector<std::size_t> inner;
    std::vector<std::size_t> outer;

    IndexSplit(const SubsystemDims &dims, std::span<const std::size_t> selected) {
        const auto strides = dims.strides();
        std::vector<bool> is_selected(dims.size(), false);
        for (std::size_t s : selected) {
            if (s >= dims.size()) {
                throw std::out_of_range("subsystem index " + std::to_string(s) + " out of range");
            }
            if (is_selected[s]) {
                throw std::invalid_argument("subsystem index " + std::to_string(s) + " repeated");
            }
            is_selected[s] = true;
        }
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (!is_selected[i]) {
                rest.push_back(i);
            }
        }
        inner = offsets(dims, strides, selected);
        outer = offsets(dims, strides, rest);
    }

   private:
    static std::vector<std::size_t> offsets(
        const SubsystemDims &dims, const std::vector<std::size_t> &strides, std::span<const std::size_t> which) {
        std::vector<std::size_t> out{0};
        for (std::size_t w : which) {
            std::vector<std::size_t> next;
            next.reserve(out.size() * dims[w]);
            for (std::size_t base : out) {
                for (std::size_t digit = 0; digit < dims[w]; ++digit) {
                    next.push_back(base + digit * strides[w]);
                }
            }
            out = std::move(next);
        }
        return out;
    }
};

/// Square complex matrix tagged with the subsystem structure of its space.
class Matrix {
   public:
    Matrix() : dims_(), data_(DenseMatrix::Ones(1, 1)) {}
    Matrix(SubsystemDims dims, DenseMatrix data) : dims_(std::move(dims)), data_(std::move(data)) {
        const auto n = static_cast<Eigen::Index>(dims_.total());
        if (data_.rows() != n || data_.cols() != n) {
            throw std::invalid_argument(
                "matrix shape " + std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()) +
                " does not match total dimension " + std::to_string(n));
        }
    }

    static Matrix identity(const SubsystemDims &dims) {
        const auto n = static_cast<Eigen::Index>(dims.total());
        return Matrix(dims, DenseMatrix::Identity(n, n));
    }
    static Matrix zeros(const SubsystemDims &dims) {
        const auto n = static_cast<Eigen::Index>(dims.total());
        return Matrix(dims, DenseMatrix::Zero(n, n));
    }
    /// |v><v|, with no normalization applied.
    static Matrix projector(const SubsystemDims &dims, const DenseVector &v) {
        return Matrix(dims, v * v.adjoint());
    }
    /// |index><index| in the computational basis.
    static Matrix basis_projector(const SubsystemDims &dims, std::size_t index) {
        Matrix m = zeros(dims);
        m.data_(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
        return m;
    }

    const SubsystemDims &dims() const { return dims_; }
    const DenseMatrix &data() const { return data_; }
    std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
    cplx operator()(std::size_t r, std::size_t c) const {
        return data_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }

    cplx trace() const { return data_.trace(); }
    Matrix adjoint() const { return Matrix(dims_, data_.adjoint()); }

    Matrix operator+(const Matrix &o) const { return Matrix(dims_, data_ + same(o).data_); }
    Matrix operator-(const Matrix &o) const { return Matrix(dims_, data_ - same(o).data_); }
    Matrix operator*(const Matrix &o) const { return Matrix(dims_, data_ * same(o).data_); }
    Matrix operator*(cplx s) const { return Matrix(dims_, data_ * s); }
    friend Matrix operator*(cplx s, const Matrix &m) { return m * s; }
    Matrix &operator+=(const Matrix &o) {
        data_ += same(o).data_;
        return *this;
    }

    /// Largest absolute entry; 0 for the zero matrix.
    double max_abs() const { return data_.size() == 0 ? 0.0 : data_.cwiseAbs().maxCoeff(); }

    /// Same numbers, different subsystem labels of equal total dimension.
    Matrix relabel(SubsystemDims dims) const { return Matrix(std::move(dims), data_); }

   private:
    const Matrix &same(const Matrix &o) const {
        if (!(o.dims_ == dims_)) {
            throw std::invalid_argument("matrix subsystem dimensions differ");
        }
        return o;
    }

    SubsystemDims dims_;
    DenseMatrix data_;
};

inline Matrix tensor(const Matrix &a, const Matrix &b) {
    const auto na = a.data().rows();
    const auto nb = b.data().rows();
    DenseMatrix out(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i) {
        for (Eigen::Index j = 0; j < na; ++j) {
            out.block(i * nb, j * nb, nb, nb) = a.data()(i, j) * b.data();
        }
    }
    return Matrix(a.dims().concat(b.dims()), std::move(out));
}

inline DenseVector tensor(const DenseVector &a, const DenseVector &b) {
    DenseVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems stay in
/// their original relative order regardless of the order in `keep`.
inline Matrix partial_trace(const Matrix &m, std::vector<std::size_t> keep) {
    std::sort(keep.begin(), keep.end());
    if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
        throw std::invalid_argument("partial_trace: repeated subsystem index");
    }
    const IndexSplit split(m.dims(), keep);
    const auto nk = static_cast<Eigen::Index>(split.inner.size());
    DenseMatrix out = DenseMatrix::Zero(nk, nk);
    const DenseMatrix &d = m.data();
    for (Eigen::Index a = 0; a < nk; ++a) {
        for (Eigen::Index b = 0; b < nk; ++b) {
            cplx acc = 0.0;
            for (std::size_t r : split.outer) {
                acc += d(static_cast<Eigen::Index>(split.inner[a] + r), static_cast<Eigen::Index>(split.inner[b] + r));
            }
            out(a, b) = acc;
        }
    }
    return Matrix(m.dims().select(keep), std::move(out));
}

/// Lifts `op`, acting on the subsystems `support` (in that order), to the full
/// space described by `total`, with identity elsewhere.
inline Matrix embed_operator(const Matrix &op, std::span<const std::size_t> support, const SubsystemDims &total) {
    if (!(total.select(support) == op.dims())) {
        throw std::invalid_argument("embed_operator: operator dims do not match support dims");
    }
    const IndexSplit split(total, support);
    const auto n = static_cast<Eigen::Index>(total.total());
    DenseMatrix out = DenseMatrix::Zero(n, n);
    const auto ns = split.inner.size();
    for (std::size_t r : split.outer) {
        for (std::size_t a = 0; a < ns; ++a) {
            for (std::size_t b = 0; b < ns; ++b) {
                out(static_cast<Eigen::Index>(split.inner[a] + r), static_cast<Eigen::Index>(split.inner[b] + r)) =
                    op(a, b);
            }
        }
    }
    return Matrix(total, std::move(out));
}

/// Computes `op * x` where `op` acts on `support` of x's row space, without
/// materializing the embedded operator. `x` may have any number of columns.
inline void apply_local_left(DenseMatrix &x, const DenseMatrix &op, const IndexSplit &split) {
    const auto ns = static_cast<Eigen::Index>(split.inner.size());
    DenseVector v(ns);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        for (std::size_t r : split.outer) {
            for (Eigen::Index a = 0; a < ns; ++a) {
                v(a) = x(static_cast<Eigen::Index>(split.inner[a] + r), c);
            }
            const DenseVector w = op * v;
            for (Eigen::Index a = 0; a < ns; ++a) {
                x(static_cast<Eigen::Index>(split.inner[a] + r), c) = w(a);
            }
        }
    }
}

/// Computes `op * x * op^dagger` for a local operator `op` on `split`'s support.
inline DenseMatrix conjugate_local(const DenseMatrix &x, const DenseMatrix &op, const IndexSplit &split) {
    DenseMatrix y = x;
    apply_local_left(y, op, split);
    DenseMatrix yt = y.adjoint();
    apply_local_left(yt, op, split);
    return yt.adjoint();
}

inline double hermiticity_defect(const Matrix &m) { return (m.data() - m.data().adjoint()).cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix &m, double tol = 1e-12) { return hermiticity_defect(m) <= tol; }

/// Eigenvalues (ascending) of a Hermitian matrix.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix &m) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(m.data(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

struct HermitianEigen {
    Eigen::VectorXd values;   // ascending
    DenseMatrix vectors;      // columns
};

inline HermitianEigen hermitian_eigen(const DenseMatrix &m) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(m);
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Singular values in descending order.
inline Eigen::VectorXd singular_values(const Matrix &m) {
    if (is_hermitian(m, 1e-13 * std::max(1.0, m.max_abs()))) {
        Eigen::VectorXd ev = hermitian_eigenvalues(m).cwiseAbs();
        std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
        return ev;
    }
    Eigen::JacobiSVD<DenseMatrix> svd(m.data());
    return svd.singularValues();
}

inline double trace_norm(const Matrix &m) { return singular_values(m).sum(); }

inline double operator_norm(const Matrix &m) {
    const auto s = singular_values(m);
    return s.size() == 0 ? 0.0 : s(0);
}

/// Checks the density-matrix invariants: Hermitian, unit trace, PSD.
inline bool is_density_matrix(const Matrix &m, double herm_tol = 1e-12, double tol = 1e-10) {
    if (!is_hermitian(m, herm_tol)) {
        return false;
    }
    if (std::abs(m.trace() - 1.0) > tol) {
        return false;
    }
    return hermitian_eigenvalues(m).minCoeff() >= -tol;
}

/// Probability distribution over string-labelled outcomes.
class Distribution {
   public:
    Distribution() = default;
    explicit Distribution(std::map<std::string, double> probs) : probs_(std::move(probs)) {}

    const std::map<std::string, double> &probs() const { return probs_; }
    double operator[](const std::string &outcome) const {
        auto it = probs_.find(outcome);
        return it == probs_.end() ? 0.0 : it->second;
    }
    double total() const {
        double s = 0;
        for (const auto &[_, p] : probs_) {
            s += p;
        }
        return s;
    }
    /// True when every probability lies in [0, 1] (within tol) and they sum to 1.
    bool is_valid(double tol = 1e-10) const {
        for (const auto &[_, p] : probs_) {
            if (p < -tol || p > 1 + tol) {
                return false;
            }
        }
        return std::abs(total() - 1.0) <= tol;
    }

   private:
    std::map<std::string, double> probs_;
};

/// Sum of absolute probability differences; outcomes missing on one side count as 0.
inline double kolmogorov_distance(const Distribution &p, const Distribution &q) {
    double d = 0;
    for (const auto &[k, v] : p.probs()) {
        d += std::abs(v - q[k]);
    }
    for (const auto &[k, v] : q.probs()) {
        if (!p.probs().contains(k)) {
            d += std::abs(v);
        }
    }
    return d;
}

namespace gates {

inline Matrix from_rows(const SubsystemDims &dims, std::initializer_list<std::initializer_list<cplx>> rows) {
    const auto n = static_cast<Eigen::Index>(dims.total());
    DenseMatrix d(n, n);
    Eigen::Index i = 0;
    for (const auto &row : rows) {
        Eigen::Index j = 0;
        for (cplx v : row) {
            d(i, j++) = v;
        }
        ++i;
    }
    return Matrix(dims, std::move(d));
}

inline const cplx kI{0.0, 1.0};

inline Matrix I() { return Matrix::identity(SubsystemDims{2}); }
inline Matrix X() { return from_rows({2}, {{0, 1}, {1, 0}}); }
inline Matrix Y() { return from_rows({2}, {{0, -kI}, {kI, 0}}); }
inline Matrix Z() { return from_rows({2}, {{1, 0}, {0, -1}}); }
inline Matrix H() {
    const double s = 1.0 / std::sqrt(2.0);
    return from_rows({2}, {{s, s}, {s, -s}});
}
/// Control on subsystem 0, target on subsystem 1.
inline Matrix CNOT() {
    return from_rows({2, 2}, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}});
}
/// exp(-i theta Z / 2).
inline Matrix Rz(double theta) {
    return from_rows({2}, {{std::exp(-kI * (theta / 2)), 0}, {0, std::exp(kI * (theta / 2))}});
}

/// exp(-i H) for Hermitian H, through its eigendecomposition.
inline Matrix expi_hermitian(const Matrix &h, double scale) {
    const auto eig = hermitian_eigen(h.data());
    DenseVector phases(eig.values.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::exp(-kI * (scale * eig.values(i)));
    }
    return Matrix(h.dims(), eig.vectors * phases.asDiagonal() * eig.vectors.adjoint());
}

}  // namespace gates

inline bool is_unitary(const Matrix &u, double tol = 1e-10) {
    const auto n = u.data().rows();
    return (u.data().adjoint() * u.data() - DenseMatrix::Identity(n, n)).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace ftlab

#endif  // FTLAB_MATCORE_HPP
