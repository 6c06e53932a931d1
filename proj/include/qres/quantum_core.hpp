#pragma once

// Dense N-qubit pure and mixed states.
//
// Basis ordering: qubit 0 is the most significant bit of the basis index, so
// for N qubits the basis state |b_0 b_1 ... b_{N-1}> has index
// sum_k b_k 2^(N-1-k). The "first qubit" traced out on re-injection is qubit 0.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "qres/errors.hpp"

namespace qres {

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Invariant tolerances per scalar type.
template <typename Real>
struct StateTolerance;

template <>
struct StateTolerance<double> {
  static constexpr double norm = 1e-10;
  static constexpr double hermitian = 1e-10;
  static constexpr double trace = 1e-10;
  static constexpr double eigenvalue_floor = -1e-9;
  static constexpr double unitarity = 1e-9;
};

template <>
struct StateTolerance<float> {
  static constexpr float norm = 1e-5f;
  static constexpr float hermitian = 1e-5f;
  static constexpr float trace = 1e-5f;
  static constexpr float eigenvalue_floor = -1e-4f;
  static constexpr float unitarity = 1e-4f;
};

inline int basis_bit(Eigen::Index index, int qubit, int num_qubits) {
  return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1);
}

inline Eigen::Index qubit_mask(int qubit, int num_qubits) {
  return Eigen::Index{1} << (num_qubits - 1 - qubit);
}

namespace detail {

inline int qubits_for_dim(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0) {
    std::ostringstream msg;
    msg << "state dimension " << dim << " is not a power of two >= 2";
    throw DimensionError(msg.str());
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0) : m.cwiseAbs().maxCoeff();
}

}  // namespace detail

template <typename Real = double>
class PureStateT {
 public:
  using Scalar = std::complex<Real>;

  explicit PureStateT(CVector<Real> amplitudes)
      : amplitudes_(std::move(amplitudes)),
        num_qubits_(detail::qubits_for_dim(amplitudes_.size())) {
    const Real deviation = std::abs(amplitudes_.norm() - Real(1));
    if (deviation > StateTolerance<Real>::norm) {
      std::ostringstream msg;
      msg << "pure state norm deviates from 1 by " << deviation;
      throw StateCorruptionError(msg.str());
    }
  }

  /// |0...0> on `num_qubits` qubits.
  static PureStateT zero(int num_qubits) {
    if (num_qubits < 1) throw DimensionError("num_qubits must be positive");
    CVector<Real> a = CVector<Real>::Zero(Eigen::Index{1} << num_qubits);
    a(0) = Scalar(1);
    return PureStateT(std::move(a));
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const CVector<Real>& amplitudes() const { return amplitudes_; }
  Scalar operator[](Eigen::Index i) const { return amplitudes_(i); }

 private:
  CVector<Real> amplitudes_;
  int num_qubits_;
};

template <typename Real = double>
class MixedStateT {
 public:
  using Scalar = std::complex<Real>;

  /// Checks Hermiticity and unit trace. Positivity is checked separately by
  /// `check_positive`, which costs an eigendecomposition.
  explicit MixedStateT(CMatrix<Real> matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) {
      throw DimensionError("density matrix must be square");
    }
    num_qubits_ = detail::qubits_for_dim(matrix_.rows());
    const Real asym = detail::max_abs(matrix_ - matrix_.adjoint());
    if (asym > StateTolerance<Real>::hermitian) {
      std::ostringstream msg;
      msg << "density matrix is not Hermitian (max deviation " << asym << ")";
      throw StateCorruptionError(msg.str());
    }
    const Real trace_dev = std::abs(matrix_.trace() - Scalar(1));
    if (trace_dev > StateTolerance<Real>::trace) {
      std::ostringstream msg;
      msg << "density matrix trace deviates from 1 by " << trace_dev;
      throw StateCorruptionError(msg.str());
    }
  }

  static MixedStateT from_pure(const PureStateT<Real>& psi) {
    return MixedStateT(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static MixedStateT zero(int num_qubits) { return from_pure(PureStateT<Real>::zero(num_qubits)); }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const CMatrix<Real>& matrix() const { return matrix_; }

 private:
  CMatrix<Real> matrix_;
  int num_qubits_ = 0;
};

template <typename Real = double>
class UnitaryT {
 public:
  explicit UnitaryT(CMatrix<Real> matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw DimensionError("unitary must be square");
    num_qubits_ = detail::qubits_for_dim(matrix_.rows());
    const Real dev = detail::max_abs(
        (matrix_ * matrix_.adjoint() - CMatrix<Real>::Identity(matrix_.rows(), matrix_.cols())).eval());
    if (dev > StateTolerance<Real>::unitarity) {
      std::ostringstream msg;
      msg << "matrix is not unitary (max |UU^dagger - I| = " << dev << ")";
      throw NumericalError(msg.str());
    }
  }

  static UnitaryT identity(int num_qubits) {
    const Eigen::Index d = Eigen::Index{1} << num_qubits;
    return UnitaryT(CMatrix<Real>::Identity(d, d));
  }

  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return matrix_.rows(); }
  const CMatrix<Real>& matrix() const { return matrix_; }

  UnitaryT adjoint() const { return UnitaryT(matrix_.adjoint()); }

  friend UnitaryT operator*(const UnitaryT& a, const UnitaryT& b) {
    if (a.dim() != b.dim()) throw DimensionError("unitary product dimension mismatch");
    return UnitaryT(a.matrix_ * b.matrix_);
  }

 private:
  CMatrix<Real> matrix_;
  int num_qubits_ = 0;
};

using PureState = PureStateT<double>;
using MixedState = MixedStateT<double>;
using Unitary = UnitaryT<double>;

/// Amplitude encoding sqrt(1-s)|0> + sqrt(s)|1>.
template <typename Real = double>
PureStateT<Real> encode_single(Real s) {
  if (!(s >= Real(0) && s <= Real(1))) {
    std::ostringstream msg;
    msg << "encoded input " << s << " is outside [0, 1]";
    throw DomainError(msg.str());
  }
  CVector<Real> a(2);
  a << std::sqrt(Real(1) - s), std::sqrt(s);
  return PureStateT<Real>(std::move(a));
}

/// Kronecker product; `a` occupies the higher-order (lower-numbered) qubits.
template <typename Real>
PureStateT<Real> tensor(const PureStateT<Real>& a, const PureStateT<Real>& b) {
  const Eigen::Index db = b.dim();
  CVector<Real> out(a.dim() * db);
  for (Eigen::Index i = 0; i < a.dim(); ++i) out.segment(i * db, db) = a[i] * b.amplitudes();
  return PureStateT<Real>(std::move(out));
}

template <typename Real>
MixedStateT<Real> tensor(const MixedStateT<Real>& a, const MixedStateT<Real>& b) {
  const Eigen::Index db = b.dim();
  CMatrix<Real> out(a.dim() * db, a.dim() * db);
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    for (Eigen::Index j = 0; j < a.dim(); ++j)
      out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return MixedStateT<Real>(std::move(out));
}

/// Trace out qubit 0.
template <typename Real>
MixedStateT<Real> partial_trace_first(const MixedStateT<Real>& rho) {
  if (rho.num_qubits() < 2) {
    throw DimensionError("partial trace needs at least 2 qubits, got 1");
  }
  const Eigen::Index h = rho.dim() / 2;
  const auto& m = rho.matrix();
  return MixedStateT<Real>(m.topLeftCorner(h, h) + m.bottomRightCorner(h, h));
}

/// |psi_in(s)><psi_in(s)| (x) Tr_0(rho): re-inject input `s` on qubit 0.
/// For a single qubit the remainder is empty and the result is the encoded state.
template <typename Real>
MixedStateT<Real> inject_and_trace(const MixedStateT<Real>& rho, Real s) {
  const Real trace_dev = std::abs(rho.matrix().trace() - std::complex<Real>(1));
  if (trace_dev > StateTolerance<Real>::trace) {
    std::ostringstream msg;
    msg << "state corrupted before injection: trace deviates by " << trace_dev;
    throw StateCorruptionError(msg.str());
  }
  const PureStateT<Real> e = encode_single(s);
  if (rho.num_qubits() == 1) return MixedStateT<Real>::from_pure(e);
  const Eigen::Index h = rho.dim() / 2;
  const auto& m = rho.matrix();
  const CMatrix<Real> reduced = m.topLeftCorner(h, h) + m.bottomRightCorner(h, h);
  const Real e0 = e[0].real();
  const Real e1 = e[1].real();
  CMatrix<Real> out(rho.dim(), rho.dim());
  out.topLeftCorner(h, h) = (e0 * e0) * reduced;
  out.topRightCorner(h, h) = (e0 * e1) * reduced;
  out.bottomLeftCorner(h, h) = (e1 * e0) * reduced;
  out.bottomRightCorner(h, h) = (e1 * e1) * reduced;
  return MixedStateT<Real>(std::move(out));
}

template <typename Real>
PureStateT<Real> evolve(const PureStateT<Real>& psi, const UnitaryT<Real>& u) {
  if (psi.dim() != u.dim()) throw DimensionError("state/unitary dimension mismatch");
  return PureStateT<Real>(u.matrix() * psi.amplitudes());
}

template <typename Real>
MixedStateT<Real> evolve(const MixedStateT<Real>& rho, const UnitaryT<Real>& u) {
  if (rho.dim() != u.dim()) throw DimensionError("state/unitary dimension mismatch");
  CMatrix<Real> out = u.matrix() * rho.matrix() * u.matrix().adjoint();
  // Restore exact Hermiticity lost to rounding so long chains stay valid.
  out = (out + out.adjoint().eval()) * Real(0.5);
  return MixedStateT<Real>(std::move(out));
}

/// dim x N matrix of Z eigenvalues: entry (i, k) = +1 if bit k of i is 0, else -1.
template <typename Real = double>
RMatrix<Real> z_sign_table(int num_qubits) {
  const Eigen::Index d = Eigen::Index{1} << num_qubits;
  RMatrix<Real> z(d, num_qubits);
  for (Eigen::Index i = 0; i < d; ++i)
    for (int k = 0; k < num_qubits; ++k) z(i, k) = basis_bit(i, k, num_qubits) ? Real(-1) : Real(1);
  return z;
}

namespace detail {

inline void check_qubit(int k, int n) {
  if (k < 0 || k >= n) {
    std::ostringstream msg;
    msg << "qubit index " << k << " out of range [0, " << n << ")";
    throw DimensionError(msg.str());
  }
}

template <typename Real, typename Derived>
Real expect_z_from_probs(const Eigen::MatrixBase<Derived>& probs, int k, int n) {
  Real acc = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) acc += basis_bit(i, k, n) ? -probs(i) : probs(i);
  return acc;
}

}  // namespace detail

template <typename Real>
Real expect_z(const PureStateT<Real>& psi, int k) {
  detail::check_qubit(k, psi.num_qubits());
  return detail::expect_z_from_probs<Real>(psi.amplitudes().cwiseAbs2(), k, psi.num_qubits());
}

template <typename Real>
Real expect_z(const MixedStateT<Real>& rho, int k) {
  detail::check_qubit(k, rho.num_qubits());
  return detail::expect_z_from_probs<Real>(rho.matrix().diagonal().real(), k, rho.num_qubits());
}

/// <Z_k> for every qubit.
template <typename Real>
RVector<Real> expect_z_all(const PureStateT<Real>& psi) {
  return z_sign_table<Real>(psi.num_qubits()).transpose() * psi.amplitudes().cwiseAbs2();
}

template <typename Real>
RVector<Real> expect_z_all(const MixedStateT<Real>& rho) {
  return z_sign_table<Real>(rho.num_qubits()).transpose() * rho.matrix().diagonal().real();
}

/// Estimate <Z> from `n_shots` measurements: one binomial draw with
/// p(+1) = (1 + exact) / 2.
template <typename Real, typename Rng>
Real sample_expect_z(Real exact, std::int64_t n_shots, Rng& rng) {
  if (n_shots < 1) throw DomainError("n_shots must be at least 1");
  if (!(std::abs(exact) <= Real(1) + StateTolerance<Real>::norm)) {
    std::ostringstream msg;
    msg << "expectation value " << exact << " is outside [-1, 1]";
    throw DomainError(msg.str());
  }
  const double p = std::clamp((1.0 + static_cast<double>(exact)) / 2.0, 0.0, 1.0);
  std::binomial_distribution<std::int64_t> draw(n_shots, p);
  const std::int64_t plus = draw(rng);
  return static_cast<Real>(static_cast<double>(2 * plus - n_shots) / static_cast<double>(n_shots));
}

/// Eigenvalue floor check; O(dim^3), meant for validation runs only.
template <typename Real>
void check_positive(const MixedStateT<Real>& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(rho.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue check failed to converge");
  const Real lowest = es.eigenvalues().minCoeff();
  if (lowest < StateTolerance<Real>::eigenvalue_floor) {
    std::ostringstream msg;
    msg << "density matrix has negative eigenvalue " << lowest;
    throw StateCorruptionError(msg.str());
  }
}

}  // namespace qres
