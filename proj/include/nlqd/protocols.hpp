#pragma once

// Von Neumann measurement on Alice's factor, branch-ensemble evolution, and
// the three ways Alice may try to influence Bob's effective state.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nlqd/dynamics.hpp"
#include "nlqd/hilbert.hpp"
#include "nlqd/parallel.hpp"

namespace nlqd {

inline constexpr double kProjectorTolerance = 1e-12;
inline constexpr double kBranchPruneThreshold = 1e-12;

/// Orthogonal projector on one local factor: P^2 = P, P^dagger = P.
class Projector {
 public:
  explicit Projector(HermitianMatrix p) : p_(std::move(p)) {
    const CMatrix& m = p_.matrix();
    if ((m * m - m).cwiseAbs().maxCoeff() > kProjectorTolerance)
      throw ValidationError("matrix is not idempotent");
  }

  /// |v><v| for a nonzero vector v (normalized internally).
  static Projector onto(CVector v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw DomainError("cannot project onto a null vector");
    v /= n;
    return Projector(HermitianMatrix::symmetrized(v * v.adjoint()));
  }

  /// |basis><basis| in dimension dim.
  static Projector basis(std::size_t dim, std::size_t index) {
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return onto(std::move(v));
  }

  static Projector identity(std::size_t dim) { return Projector(HermitianMatrix::identity(dim)); }

  Projector complement() const {
    const auto n = static_cast<Eigen::Index>(dim());
    return Projector(HermitianMatrix::symmetrized(CMatrix::Identity(n, n) - p_.matrix()));
  }

  std::size_t dim() const noexcept { return p_.dim(); }
  const CMatrix& matrix() const noexcept { return p_.matrix(); }
  const HermitianMatrix& hermitian() const noexcept { return p_; }

  bool commutes_with(const Projector& other, double tol = kProjectorTolerance) const {
    const CMatrix& a = matrix();
    const CMatrix& b = other.matrix();
    return (a * b - b * a).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  HermitianMatrix p_;
};

/// (P (x) 1) psi
inline CVector apply_on_a(const CMatrix& p, const StateVector& state) {
  const auto& s = state.shape();
  const auto da = static_cast<Eigen::Index>(s.dim_a());
  const auto db = static_cast<Eigen::Index>(s.dim_b());
  if (p.rows() != da) throw ShapeError("operator does not act on Alice's factor");
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor coeffs = Eigen::Map<const RowMajor>(state.amps().data(), da, db);
  const RowMajor out = p * coeffs;
  return Eigen::Map<const CVector>(out.data(), da * db);
}

struct Branch {
  double weight;
  StateVector state;
};

/// Weighted post-measurement pure states, weights summing to one.
class BranchEnsemble {
 public:
  explicit BranchEnsemble(std::vector<Branch> branches) {
    double total = 0.0;
    for (auto& b : branches) {
      if (!(b.weight >= 0.0 && b.weight <= 1.0 + kNormTolerance))
        throw ValidationError("branch weight outside [0, 1]");
      if (b.weight < kBranchPruneThreshold) continue;
      total += b.weight;
      branches_.push_back(std::move(b));
    }
    if (branches_.empty()) throw ValidationError("ensemble has no branch of positive weight");
    if (std::abs(total - 1.0) > kNormTolerance) throw ValidationError("branch weights do not sum to 1");
    for (std::size_t i = 1; i < branches_.size(); ++i)
      if (branches_[i].state.shape() != branches_[0].state.shape())
        throw ShapeError("branches have different shapes");
  }

  static BranchEnsemble pure(StateVector s) { return BranchEnsemble({{1.0, std::move(s)}}); }

  const std::vector<Branch>& branches() const noexcept { return branches_; }
  std::size_t size() const noexcept { return branches_.size(); }
  const BipartiteShape& shape() const { return branches_.front().state.shape(); }

  double total_weight() const {
    double t = 0.0;
    for (const auto& b : branches_) t += b.weight;
    return t;
  }

  /// sum_x p_x Tr_A |xi_x><xi_x|
  DensityMatrix reduced_b() const {
    CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(shape().dim_b()),
                                static_cast<Eigen::Index>(shape().dim_b()));
    for (const auto& b : branches_) acc += b.weight * partial_trace_b(b.state).matrix();
    return DensityMatrix::trusted(std::move(acc));
  }

 private:
  std::vector<Branch> branches_;
};

/// Von Neumann update for a complete set of orthogonal projectors on A.
inline BranchEnsemble measure_spectral(const StateVector& state, const std::vector<Projector>& projectors) {
  if (projectors.empty()) throw ValidationError("measurement needs at least one projector");
  const auto da = static_cast<Eigen::Index>(state.shape().dim_a());
  CMatrix sum = CMatrix::Zero(da, da);
  for (const auto& p : projectors) {
    if (p.dim() != state.shape().dim_a()) throw ShapeError("projector does not act on Alice's factor");
    sum += p.matrix();
  }
  if ((sum - CMatrix::Identity(da, da)).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("projectors do not resolve the identity");

  std::vector<Branch> branches;
  for (const auto& p : projectors) {
    CVector v = apply_on_a(p.matrix(), state);
    const double prob = v.squaredNorm() / state.amps().squaredNorm();
    if (prob < kBranchPruneThreshold) continue;
    branches.push_back({prob, StateVector::normalized(state.shape(), std::move(v))});
  }
  // Renormalize weights: exact in infinite precision, absorbs rounding.
  double total = 0.0;
  for (const auto& b : branches) total += b.weight;
  for (auto& b : branches) b.weight /= total;
  return BranchEnsemble(std::move(branches));
}

/// Two-outcome measurement {X, 1 - X} on Alice's factor.
inline BranchEnsemble measure_on_a(const StateVector& state, const Projector& x) {
  return measure_spectral(state, {x, x.complement()});
}

/// Eigenprojectors of a hermitian observable on A, degenerate eigenvalues
/// (within `tol`) grouped into one projector.
inline std::vector<Projector> spectral_projectors(const HermitianMatrix& m, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix());
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();
  std::vector<Projector> out;
  Eigen::Index start = 0;
  while (start < vals.size()) {
    Eigen::Index end = start + 1;
    while (end < vals.size() && vals[end] - vals[start] <= tol) ++end;
    const CMatrix block = vecs.middleCols(start, end - start);
    out.emplace_back(HermitianMatrix::symmetrized(block * block.adjoint()));
    start = end;
  }
  return out;
}

inline BranchEnsemble measure_observable(const StateVector& state, const HermitianMatrix& m) {
  return measure_spectral(state, spectral_projectors(m));
}

/// Bob's effective state on a time grid; `blochs` is filled for qubits only.
struct ReducedSeries {
  std::vector<double> times;
  std::vector<DensityMatrix> rhos;
  std::vector<BlochVector> blochs;

  std::size_t size() const noexcept { return times.size(); }
};

inline ReducedSeries reduced_series(const std::vector<double>& times, std::vector<DensityMatrix> rhos) {
  ReducedSeries out{times, std::move(rhos), {}};
  if (!out.rhos.empty() && out.rhos.front().dim() == 2) {
    out.blochs.reserve(out.rhos.size());
    for (const auto& r : out.rhos) out.blochs.push_back(bloch_vector(r));
  }
  return out;
}

inline ReducedSeries reduced_series(const Trajectory& traj) {
  std::vector<DensityMatrix> rhos;
  rhos.reserve(traj.size());
  for (const auto& s : traj.states) rhos.push_back(partial_trace_b(s));
  return reduced_series(traj.times, std::move(rhos));
}

/// Integrates every branch independently and averages Bob's reduced states
/// with the weights fixed at measurement time.
inline ReducedSeries evolve_ensemble(const BranchEnsemble& ens, const HamiltonianPair& h,
                                     const Nonlinearity& nl, const TimeGrid& grid, std::size_t jobs = 0) {
  const auto& branches = ens.branches();
  auto trajectories = parallel_map(
      branches.size(),
      [&](std::size_t i) {
        try {
          return integrate(branches[i].state, h, nl, grid);
        } catch (const DivergenceError& e) {
          throw DivergenceError("non-finite amplitude", e.step(), static_cast<long>(i));
        }
      },
      jobs);

  const std::size_t n = trajectories.front().size();
  const auto db = static_cast<Eigen::Index>(ens.shape().dim_b());
  std::vector<DensityMatrix> rhos;
  rhos.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    CMatrix acc = CMatrix::Zero(db, db);
    for (std::size_t b = 0; b < branches.size(); ++b)
      acc += branches[b].weight * partial_trace_b(trajectories[b].states[t]).matrix();
    rhos.push_back(DensityMatrix::trusted(std::move(acc)));
  }
  return reduced_series(trajectories.front().times, std::move(rhos));
}

/// Bob's series for Alice's two choices.
struct ProtocolOutcome {
  ReducedSeries first;
  ReducedSeries second;
  std::vector<std::string> warnings;
};

/// Alice measures X or X' at t0 = 0.
inline ProtocolOutcome protocol_observable_choice(const StateVector& source, const Projector& x,
                                                  const Projector& x_prime, const HamiltonianPair& h,
                                                  const Nonlinearity& nl, const TimeGrid& grid,
                                                  std::size_t jobs = 0) {
  ProtocolOutcome out;
  if (x.commutes_with(x_prime))
    out.warnings.emplace_back("X and X' commute; the observable-choice protocol is vacuous");
  const BranchEnsemble ex = measure_on_a(source, x);
  const BranchEnsemble ex_prime = measure_on_a(source, x_prime);
  auto arms = parallel_map(
      2, [&](std::size_t i) { return evolve_ensemble(i == 0 ? ex : ex_prime, h, nl, grid, 1); }, jobs);
  out.first = std::move(arms[0]);
  out.second = std::move(arms[1]);
  return out;
}

/// Unmeasured evolution (first) versus measuring X at t0 = 0 (second).
inline ProtocolOutcome protocol_measure_or_not(const StateVector& source, const Projector& x,
                                               const HamiltonianPair& h, const Nonlinearity& nl,
                                               const TimeGrid& grid, std::size_t jobs = 0) {
  ProtocolOutcome out;
  const BranchEnsemble unmeasured = BranchEnsemble::pure(source);
  const BranchEnsemble measured = measure_on_a(source, x);
  auto arms = parallel_map(
      2, [&](std::size_t i) { return evolve_ensemble(i == 0 ? unmeasured : measured, h, nl, grid, 1); },
      jobs);
  out.first = std::move(arms[0]);
  out.second = std::move(arms[1]);
  return out;
}

/// Alice's local Hamiltonian H_A (first) versus H_A' (second); no measurement.
inline ProtocolOutcome protocol_intervention(const StateVector& source, const HamiltonianPair& h,
                                             const HamiltonianPair& h_prime, const Nonlinearity& nl,
                                             const TimeGrid& grid, std::size_t jobs = 0) {
  if (!(h.h_b == h_prime.h_b))
    throw PreconditionError("local intervention must leave Bob's Hamiltonian unchanged");
  ProtocolOutcome out;
  auto arms = parallel_map(
      2,
      [&](std::size_t i) { return reduced_series(integrate(source, i == 0 ? h : h_prime, nl, grid)); },
      jobs);
  out.first = std::move(arms[0]);
  out.second = std::move(arms[1]);
  return out;
}

namespace detail {
inline void check_aligned(const ReducedSeries& a, const ReducedSeries& b) {
  if (a.times.size() != b.times.size()) throw ShapeError("series have different lengths");
  for (std::size_t i = 0; i < a.times.size(); ++i)
    if (std::abs(a.times[i] - b.times[i]) > 1e-12) throw ShapeError("series grids are not aligned");
}
}  // namespace detail

/// |Tr(P rho(t)) - Tr(P rho'(t))| per grid time, for one observable P on B.
inline std::vector<double> distinguishability(const ReducedSeries& s1, const ReducedSeries& s2,
                                              const HermitianMatrix& observable) {
  detail::check_aligned(s1, s2);
  std::vector<double> out(s1.size());
  for (std::size_t i = 0; i < s1.size(); ++i)
    out[i] = std::abs(s1.rhos[i].expectation(observable) - s2.rhos[i].expectation(observable));
  return out;
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ShapeError("density matrices of different dimension");
  const CMatrix diff = a.matrix() - b.matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Per-time trace distance; bounds the signal of every observable on B.
inline std::vector<double> trace_distance_series(const ReducedSeries& s1, const ReducedSeries& s2) {
  detail::check_aligned(s1, s2);
  std::vector<double> out(s1.size());
  for (std::size_t i = 0; i < s1.size(); ++i) out[i] = trace_distance(s1.rhos[i], s2.rhos[i]);
  return out;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace nlqd
