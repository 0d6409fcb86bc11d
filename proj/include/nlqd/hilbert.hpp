#pragma once

// Dense finite-dimensional bipartite state algebra: states on H_A (x) H_B,
// local Hamiltonians, reduced density matrices and qubit observables.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>

#include "nlqd/error.hpp"

namespace nlqd {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-9;

/// Dimensions of the two local factors. Basis element |jk> sits at flat
/// index j * dim_b + k.
class BipartiteShape {
 public:
  BipartiteShape(std::size_t dim_a, std::size_t dim_b) : dim_a_(dim_a), dim_b_(dim_b) {
    if (dim_a == 0 || dim_b == 0) throw ShapeError("local dimensions must be >= 1");
  }

  static BipartiteShape qubits() { return {2, 2}; }

  std::size_t dim_a() const noexcept { return dim_a_; }
  std::size_t dim_b() const noexcept { return dim_b_; }
  std::size_t total() const noexcept { return dim_a_ * dim_b_; }

  std::size_t index(std::size_t j, std::size_t k) const noexcept { return j * dim_b_ + k; }
  std::pair<std::size_t, std::size_t> split(std::size_t flat) const noexcept {
    return {flat / dim_b_, flat % dim_b_};
  }

  friend bool operator==(const BipartiteShape&, const BipartiteShape&) = default;

 private:
  std::size_t dim_a_;
  std::size_t dim_b_;
};

/// Pure state sum_{jk} alpha_{jk} |jk>.
///
/// The checked factories enforce unit norm; `unchecked` exists for samples of
/// an integrated trajectory, whose norm drift is a diagnostic rather than an
/// invariant violation.
class StateVector {
 public:
  static StateVector from_amplitudes(BipartiteShape shape, CVector amps,
                                     double tol = kNormTolerance) {
    check_length(shape, amps);
    const double n2 = amps.squaredNorm();
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tol) {
      throw DomainError("state is not normalized: sum |alpha|^2 = " + std::to_string(n2));
    }
    return StateVector(shape, std::move(amps));
  }

  /// Rescales a nonzero vector to unit norm.
  static StateVector normalized(BipartiteShape shape, CVector amps) {
    check_length(shape, amps);
    const double n = amps.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a null vector");
    amps /= n;
    return StateVector(shape, std::move(amps));
  }

  static StateVector unchecked(BipartiteShape shape, CVector amps) {
    check_length(shape, amps);
    return StateVector(shape, std::move(amps));
  }

  const BipartiteShape& shape() const noexcept { return shape_; }
  const CVector& amps() const noexcept { return amps_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(amps_.size()); }

  Complex operator()(std::size_t j, std::size_t k) const {
    return amps_[static_cast<Eigen::Index>(shape_.index(j, k))];
  }

  double norm() const { return amps_.norm(); }
  StateVector renormalized() const { return normalized(shape_, amps_); }

 private:
  StateVector(BipartiteShape shape, CVector amps) : shape_(shape), amps_(std::move(amps)) {}

  static void check_length(const BipartiteShape& shape, const CVector& amps) {
    if (static_cast<std::size_t>(amps.size()) != shape.total()) {
      throw ShapeError("amplitude array has length " + std::to_string(amps.size()) +
                       ", shape requires " + std::to_string(shape.total()));
    }
  }

  BipartiteShape shape_;
  CVector amps_;
};

/// Hermitian matrix, exact as stored: m(i,j) == conj(m(j,i)).
class HermitianMatrix {
 public:
  explicit HermitianMatrix(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw ShapeError("hermitian matrix must be square");
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      for (Eigen::Index j = i; j < m_.cols(); ++j) {
        if (m_(i, j) != std::conj(m_(j, i))) {
          throw ValidationError("matrix is not hermitian at (" + std::to_string(i) + ", " +
                                std::to_string(j) + ")");
        }
      }
    }
  }

  /// Builds (m + m^dagger)/2 with the diagonal forced real.
  static HermitianMatrix symmetrized(const CMatrix& m) {
    CMatrix h = m;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      h(i, i) = h(i, i).real();
      for (Eigen::Index j = i + 1; j < h.cols(); ++j) {
        const Complex v = 0.5 * (m(i, j) + std::conj(m(j, i)));
        h(i, j) = v;
        h(j, i) = std::conj(v);
      }
    }
    return HermitianMatrix(std::move(h));
  }

  static HermitianMatrix zero(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return HermitianMatrix(CMatrix::Zero(n, n));
  }

  static HermitianMatrix identity(std::size_t dim) {
    const auto n = static_cast<Eigen::Index>(dim);
    return HermitianMatrix(CMatrix::Identity(n, n));
  }

  static HermitianMatrix diagonal(const Eigen::VectorXd& values) {
    return HermitianMatrix(values.cast<Complex>().asDiagonal());
  }

  /// [[d0, off], [conj(off), d1]]
  static HermitianMatrix qubit(double d0, double d1, Complex off) {
    CMatrix m(2, 2);
    m << d0, off, std::conj(off), d1;
    return HermitianMatrix(std::move(m));
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  /// True when every off-diagonal entry is exactly zero.
  bool is_diagonal() const {
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
      for (Eigen::Index j = 0; j < m_.cols(); ++j)
        if (i != j && m_(i, j) != Complex{}) return false;
    return true;
  }

  Eigen::VectorXd diagonal_values() const { return m_.diagonal().real(); }

  HermitianMatrix shifted(double lambda) const {
    CMatrix m = m_;
    m.diagonal().array() += lambda;
    return HermitianMatrix(std::move(m));
  }

  friend bool operator==(const HermitianMatrix& a, const HermitianMatrix& b) { return a.m_ == b.m_; }

 private:
  CMatrix m_;
};

/// Density operator: hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix m, double tol = kNormTolerance) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw ShapeError("density matrix must be square");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw ValidationError("density matrix is not hermitian");
    if (std::abs(m_.trace() - Complex{1.0}) > tol)
      throw ValidationError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
      throw ValidationError("density matrix has a negative eigenvalue");
  }

  /// Skips validation; for matrices that are valid by construction.
  static DensityMatrix trusted(CMatrix m) { return DensityMatrix(std::move(m), Trusted{}); }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }

  /// Tr(P rho) for a hermitian observable P.
  double expectation(const HermitianMatrix& p) const {
    if (p.dim() != dim()) throw ShapeError("observable dimension mismatch");
    return (p.matrix() * m_).trace().real();
  }

  bool is_valid(double tol = kNormTolerance) const {
    try {
      DensityMatrix check(m_, tol);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

 private:
  struct Trusted {};
  DensityMatrix(CMatrix m, Trusted) : m_(std::move(m)) {}
  CMatrix m_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// <k|rho_B|k'> = sum_j alpha_{jk} conj(alpha_{jk'})
inline DensityMatrix partial_trace_b(const StateVector& state) {
  const auto& s = state.shape();
  const auto da = static_cast<Eigen::Index>(s.dim_a());
  const auto db = static_cast<Eigen::Index>(s.dim_b());
  // Row j of `a` holds alpha_{j.}; rho_B = a^T conj(a).
  const auto a = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      state.amps().data(), da, db);
  return DensityMatrix::trusted(a.transpose() * a.conjugate());
}

/// <j|rho_A|j'> = sum_k alpha_{jk} conj(alpha_{j'k})
inline DensityMatrix partial_trace_a(const StateVector& state) {
  const auto& s = state.shape();
  const auto da = static_cast<Eigen::Index>(s.dim_a());
  const auto db = static_cast<Eigen::Index>(s.dim_b());
  const auto a = Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      state.amps().data(), da, db);
  return DensityMatrix::trusted(a * a.adjoint());
}

/// Fano components of a qubit density matrix: rho = (1 + n.sigma)/2.
inline BlochVector bloch_vector(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw UnsupportedDimension("Bloch vector requires a qubit density matrix");
  const Complex r01 = rho(0, 1);
  return {2.0 * r01.real(), -2.0 * r01.imag(), (rho(0, 0) - rho(1, 1)).real()};
}

inline DensityMatrix fano_reconstruct(const BlochVector& n) {
  CMatrix m(2, 2);
  m << Complex(1.0 + n.z, 0.0), Complex(n.x, -n.y), Complex(n.x, n.y), Complex(1.0 - n.z, 0.0);
  return DensityMatrix::trusted(0.5 * m);
}

/// Pure-state two-qubit concurrence, sqrt(1 - |n|^2).
///
/// Evaluated as 2|a00 a11 - a01 a10| / <psi|psi>, which equals the purity
/// form for pure states but keeps full relative accuracy near separability.
inline double concurrence(const StateVector& state) {
  if (state.shape() != BipartiteShape::qubits())
    throw UnsupportedDimension("concurrence is defined here for two qubits only");
  const Complex det = state(0, 0) * state(1, 1) - state(0, 1) * state(1, 0);
  return 2.0 * std::abs(det) / state.amps().squaredNorm();
}

inline Complex inner(const StateVector& a, const StateVector& b) {
  if (a.shape() != b.shape()) throw ShapeError("inner product of states with different shapes");
  return a.amps().dot(b.amps());  // conjugates the left operand
}

/// |<a|b>|
inline double overlap(const StateVector& a, const StateVector& b) { return std::abs(inner(a, b)); }

inline StateVector basis_state(const BipartiteShape& shape, std::size_t j, std::size_t k) {
  if (j >= shape.dim_a() || k >= shape.dim_b()) throw DomainError("basis label out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(shape.total()));
  v[static_cast<Eigen::Index>(shape.index(j, k))] = 1.0;
  return StateVector::from_amplitudes(shape, std::move(v));
}

inline StateVector product_state(const CVector& a, const CVector& b) {
  const BipartiteShape shape(static_cast<std::size_t>(a.size()), static_cast<std::size_t>(b.size()));
  CVector v(static_cast<Eigen::Index>(shape.total()));
  for (Eigen::Index j = 0; j < a.size(); ++j)
    for (Eigen::Index k = 0; k < b.size(); ++k) v[j * b.size() + k] = a[j] * b[k];
  return StateVector::normalized(shape, std::move(v));
}

/// (|00> + |11>)/sqrt(2)
inline StateVector bell_state() {
  CVector v(4);
  v << 1.0, 0.0, 0.0, 1.0;
  return StateVector::normalized(BipartiteShape::qubits(), std::move(v));
}

/// ((1+x)|00> + (1-x)|11>) / sqrt(2(1+x^2)): Bell state at x=0, |00> at x=1.
inline StateVector family_psi_x(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("psi_x family requires 0 <= x <= 1");
  const double s = 1.0 / std::sqrt(2.0 * (1.0 + x * x));
  CVector v(4);
  v << (1.0 + x) * s, 0.0, 0.0, (1.0 - x) * s;
  return StateVector::from_amplitudes(BipartiteShape::qubits(), std::move(v));
}

/// |0>((1-eps)|0> + eps|1>), normalized; the separable partner of |00>.
inline StateVector separable_eps(double eps) {
  CVector v(4);
  v << 1.0 - eps, eps, 0.0, 0.0;
  return StateVector::normalized(BipartiteShape::qubits(), std::move(v));
}

/// psi_x parameter whose overlap with the Bell state is 1 - eps.
inline double psi_x_for_bell_overlap(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw DomainError("overlap defect must lie in [0, 1)");
  const double o = 1.0 - eps;
  return std::sqrt(1.0 / (o * o) - 1.0);
}

}  // namespace nlqd
