#pragma once

// Nonlinear Schroedinger dynamics on H_A (x) H_B with a self-potential that
// singles out the product basis {|jk>}:
//
//   i d/dt psi = (H_A (x) 1 + 1 (x) H_B) psi + K(psi),
//   K(psi)_{jk} = f_{jk}(|<psi|A_{jk}|jk>|) alpha_{jk}.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "nlqd/hilbert.hpp"

namespace nlqd {

inline constexpr double kLogClamp = 1e-15;

/// The per-basis-element functions f_{jk} and optional operators A_{jk}.
class Nonlinearity {
 public:
  enum class Kind { GrossPitaevskii, Logarithmic, Custom };

  using Function = std::function<double(double)>;

  /// f(x) = g x^2 on every basis element.
  static Nonlinearity gross_pitaevskii(double g) { return Nonlinearity(Kind::GrossPitaevskii, g); }

  /// f(x) = g log x, with x clamped below at kLogClamp.
  static Nonlinearity logarithmic(double g) { return Nonlinearity(Kind::Logarithmic, g); }

  /// One function per flat basis index (or a single function shared by all),
  /// with optional per-index operators on the full product space. An empty
  /// `ops` means A_{jk} = 1 everywhere.
  static Nonlinearity custom(std::vector<Function> fs,
                             std::vector<std::optional<HermitianMatrix>> ops = {}) {
    if (fs.empty()) throw DomainError("custom nonlinearity needs at least one function");
    Nonlinearity nl(Kind::Custom, 0.0);
    nl.functions_ = std::make_shared<const std::vector<Function>>(std::move(fs));
    if (!ops.empty())
      nl.operators_ = std::make_shared<const std::vector<std::optional<HermitianMatrix>>>(std::move(ops));
    return nl;
  }

  static Nonlinearity none() { return gross_pitaevskii(0.0); }

  Kind kind() const noexcept { return kind_; }
  double coupling() const noexcept { return g_; }

  bool identity_operators() const noexcept { return operators_ == nullptr; }

  double f(std::size_t index, double x) const {
    switch (kind_) {
      case Kind::GrossPitaevskii:
        return g_ * x * x;
      case Kind::Logarithmic:
        return g_ * std::log(std::max(x, kLogClamp));
      case Kind::Custom:
        break;
    }
    const auto& fs = *functions_;
    const double v = fs.size() == 1 ? fs[0](x) : fs.at(index)(x);
    if (!std::isfinite(v)) throw NumericError("nonlinearity returned a non-finite value", index);
    return v;
  }

  /// |<psi|A_i|i>| for flat index i.
  double argument(const CVector& psi, std::size_t index) const {
    const auto i = static_cast<Eigen::Index>(index);
    if (operators_ == nullptr) return std::abs(psi[i]);
    const auto& op = operators_->at(index);
    if (!op) return std::abs(psi[i]);
    return std::abs(psi.dot(op->matrix().col(i)));
  }

  /// Throws when the nonlinearity does not fit a space of total dimension n.
  void check_dimension(std::size_t n) const {
    if (kind_ != Kind::Custom) return;
    if (functions_->size() != 1 && functions_->size() != n)
      throw ShapeError("custom nonlinearity has " + std::to_string(functions_->size()) +
                       " functions for a space of dimension " + std::to_string(n));
    if (operators_ != nullptr) {
      if (operators_->size() != n) throw ShapeError("custom nonlinearity operator count mismatch");
      for (const auto& op : *operators_)
        if (op && op->dim() != n) throw ShapeError("nonlinearity operator must act on the product space");
    }
  }

 private:
  Nonlinearity(Kind kind, double g) : kind_(kind), g_(g) {}

  Kind kind_;
  double g_;
  std::shared_ptr<const std::vector<Function>> functions_;
  std::shared_ptr<const std::vector<std::optional<HermitianMatrix>>> operators_;
};

/// Local Hamiltonians; the global generator is H_A (x) 1 + 1 (x) H_B.
struct HamiltonianPair {
  HermitianMatrix h_a;
  HermitianMatrix h_b;

  BipartiteShape shape() const { return {h_a.dim(), h_b.dim()}; }
  bool both_diagonal() const { return h_a.is_diagonal() && h_b.is_diagonal(); }

  /// Dense (dim_a dim_b)^2 global matrix.
  CMatrix global() const {
    const auto da = static_cast<Eigen::Index>(h_a.dim());
    const auto db = static_cast<Eigen::Index>(h_b.dim());
    return Eigen::kroneckerProduct(h_a.matrix(), CMatrix::Identity(db, db)).eval() +
           Eigen::kroneckerProduct(CMatrix::Identity(da, da), h_b.matrix()).eval();
  }
};

/// Two-qubit parametrisation
///   H_A = [[a1, c], [conj c, a2]],  H_B = [[b1, d], [conj d, b2]]
/// with Gross-Pitaevskii coupling g.
struct QubitParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  Complex c{};
  Complex d{};
  double g = 0.0;

  HamiltonianPair hamiltonians() const {
    return {HermitianMatrix::qubit(a1, a2, c), HermitianMatrix::qubit(b1, b2, d)};
  }
  Nonlinearity nonlinearity() const { return Nonlinearity::gross_pitaevskii(g); }
};

/// Sampling grid shared by every integration: fixed step dt, a sample every
/// `sample_every` steps, plus the final step.
struct TimeGrid {
  double t_end = 0.0;
  double dt = 1e-3;
  std::size_t sample_every = 100;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("t_end must be >= 0");
    if (sample_every == 0) throw DomainError("sample_every must be positive");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

  std::vector<std::size_t> sample_steps() const {
    const std::size_t n = steps();
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s <= n; s += sample_every) out.push_back(s);
    if (out.back() != n) out.push_back(n);
    return out;
  }

  std::vector<double> times() const {
    std::vector<double> out;
    for (auto s : sample_steps()) out.push_back(static_cast<double>(s) * dt);
    return out;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;

  std::size_t size() const noexcept { return times.size(); }
  const StateVector& back() const { return states.back(); }

  double max_norm_drift() const {
    double m = 0.0;
    for (const auto& s : states) m = std::max(m, std::abs(s.norm() - 1.0));
    return m;
  }

  Trajectory renormalized() const {
    Trajectory out{times, {}};
    out.states.reserve(states.size());
    for (const auto& s : states) out.states.push_back(s.renormalized());
    return out;
  }
};

/// Divergence during integration, with every sample recorded before it.
class IntegrationDivergence : public DivergenceError {
 public:
  IntegrationDivergence(std::size_t step, Trajectory partial)
      : DivergenceError("non-finite amplitude", step), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

namespace detail {

inline void check_compatible(const BipartiteShape& shape, const HamiltonianPair& h,
                             const Nonlinearity& nl) {
  if (h.h_a.dim() != shape.dim_a() || h.h_b.dim() != shape.dim_b())
    throw ShapeError("Hamiltonian dimensions do not match the state shape");
  nl.check_dimension(shape.total());
}

/// out = (H_A (x) 1 + 1 (x) H_B) psi, without forming the Kronecker product.
inline void apply_local(const HamiltonianPair& h, std::size_t da, std::size_t db,
                        const CVector& psi, CVector& out) {
  const CMatrix& ha = h.h_a.matrix();
  const CMatrix& hb = h.h_b.matrix();
  for (std::size_t j = 0; j < da; ++j) {
    for (std::size_t k = 0; k < db; ++k) {
      Complex acc{};
      for (std::size_t l = 0; l < da; ++l)
        acc += ha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) *
               psi[static_cast<Eigen::Index>(l * db + k)];
      for (std::size_t m = 0; m < db; ++m)
        acc += hb(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) *
               psi[static_cast<Eigen::Index>(j * db + m)];
      out[static_cast<Eigen::Index>(j * db + k)] = acc;
    }
  }
}

inline void add_self_potential(const Nonlinearity& nl, const CVector& psi, CVector& out) {
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out[i] += nl.f(idx, nl.argument(psi, idx)) * psi[i];
  }
}

/// out = -i [ (H + shift) psi + K(psi) ]
inline void rhs_into(const HamiltonianPair& h, const Nonlinearity& nl, std::size_t da,
                     std::size_t db, const CVector& psi, double shift, CVector& out) {
  apply_local(h, da, db, psi, out);
  if (shift != 0.0) out += shift * psi;
  add_self_potential(nl, psi, out);
  out *= Complex(0.0, -1.0);
}

}  // namespace detail

/// K(psi), component f_{jk}(|<psi|A_{jk}|jk>|) alpha_{jk}.
inline CVector self_potential(const StateVector& state, const Nonlinearity& nl) {
  nl.check_dimension(state.size());
  CVector out = CVector::Zero(state.amps().size());
  detail::add_self_potential(nl, state.amps(), out);
  return out;
}

/// d psi / dt = -i [ (H_A (x) 1 + 1 (x) H_B) psi + K(psi) ].
inline CVector rhs(const StateVector& state, const HamiltonianPair& h, const Nonlinearity& nl) {
  detail::check_compatible(state.shape(), h, nl);
  CVector out(state.amps().size());
  detail::rhs_into(h, nl, state.shape().dim_a(), state.shape().dim_b(), state.amps(), 0.0, out);
  return out;
}

/// Optional time-dependent scalar added to the global Hamiltonian, H + s(t) 1.
using EnergyShift = std::function<double(double)>;

/// Classic fixed-step fourth-order Runge-Kutta. No renormalization is applied
/// between steps; norm drift is left observable.
inline Trajectory integrate(const StateVector& psi0, const HamiltonianPair& h,
                            const Nonlinearity& nl, const TimeGrid& grid,
                            const EnergyShift& shift = {}) {
  grid.validate();
  const auto& shape = psi0.shape();
  detail::check_compatible(shape, h, nl);
  const std::size_t da = shape.dim_a();
  const std::size_t db = shape.dim_b();
  const double dt = grid.dt;
  const std::size_t n_steps = grid.steps();
  const auto samples = grid.sample_steps();

  const auto n = psi0.amps().size();
  CVector y = psi0.amps();
  CVector k1(n), k2(n), k3(n), k4(n), tmp(n);

  Trajectory traj;
  traj.times.reserve(samples.size());
  traj.states.reserve(samples.size());
  std::size_t next_sample = 0;
  auto record = [&](std::size_t step) {
    traj.times.push_back(static_cast<double>(step) * dt);
    traj.states.push_back(StateVector::unchecked(shape, y));
    ++next_sample;
  };
  auto s = [&](double t) { return shift ? shift(t) : 0.0; };

  record(0);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double t = static_cast<double>(step - 1) * dt;
    detail::rhs_into(h, nl, da, db, y, s(t), k1);
    tmp = y + (0.5 * dt) * k1;
    detail::rhs_into(h, nl, da, db, tmp, s(t + 0.5 * dt), k2);
    tmp = y + (0.5 * dt) * k2;
    detail::rhs_into(h, nl, da, db, tmp, s(t + 0.5 * dt), k3);
    tmp = y + dt * k3;
    detail::rhs_into(h, nl, da, db, tmp, s(t + dt), k4);
    y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!std::isfinite(y.squaredNorm())) throw IntegrationDivergence(step, std::move(traj));
    if (next_sample < samples.size() && samples[next_sample] == step) record(step);
  }
  return traj;
}

/// Final state only.
inline StateVector evolve(const StateVector& psi0, const HamiltonianPair& h, const Nonlinearity& nl,
                          double t, double dt) {
  TimeGrid grid{t, dt, std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / dt)))};
  return integrate(psi0, h, nl, grid).back();
}

/// Closed-form evolution for Hamiltonians diagonal in the preferred basis:
/// alpha_{jk}(t) = alpha_{jk}(0) exp(-i (a_j + b_k + f_{jk}(|alpha_{jk}(0)|)) t).
inline StateVector analytic_diagonal_evolve(const StateVector& psi0, const HamiltonianPair& h,
                                            const Nonlinearity& nl, double t) {
  detail::check_compatible(psi0.shape(), h, nl);
  if (!h.both_diagonal()) throw PreconditionError("closed-form evolution needs diagonal Hamiltonians");
  if (!nl.identity_operators())
    throw PreconditionError("closed-form evolution needs A_{jk} = identity");
  const auto& shape = psi0.shape();
  const Eigen::VectorXd a = h.h_a.diagonal_values();
  const Eigen::VectorXd b = h.h_b.diagonal_values();
  CVector out(psi0.amps().size());
  for (std::size_t j = 0; j < shape.dim_a(); ++j) {
    for (std::size_t k = 0; k < shape.dim_b(); ++k) {
      const auto i = static_cast<Eigen::Index>(shape.index(j, k));
      const Complex alpha0 = psi0.amps()[i];
      const double freq = a[static_cast<Eigen::Index>(j)] + b[static_cast<Eigen::Index>(k)] +
                          nl.f(static_cast<std::size_t>(i), std::abs(alpha0));
      out[i] = alpha0 * std::polar(1.0, -freq * t);
    }
  }
  return StateVector::unchecked(shape, std::move(out));
}

/// Multiplies every sample by exp(i lambda(t)).
inline Trajectory gauge_transform(const Trajectory& traj, const std::function<double(double)>& lambda) {
  Trajectory out{traj.times, {}};
  out.states.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Complex phase = std::polar(1.0, lambda(traj.times[i]));
    out.states.push_back(StateVector::unchecked(traj.states[i].shape(), phase * traj.states[i].amps()));
  }
  return out;
}

/// Max componentwise gap between gauge_transform(integrate(H)) and a direct
/// integration with H - lambda'(t) 1 started from exp(i lambda(0)) psi0.
inline double gauge_mismatch(const StateVector& psi0, const HamiltonianPair& h, const Nonlinearity& nl,
                             const TimeGrid& grid, const std::function<double(double)>& lambda,
                             const std::function<double(double)>& lambda_prime) {
  const Trajectory transformed = gauge_transform(integrate(psi0, h, nl, grid), lambda);
  const StateVector start =
      StateVector::unchecked(psi0.shape(), std::polar(1.0, lambda(0.0)) * psi0.amps());
  const Trajectory direct =
      integrate(start, h, nl, grid, [&](double t) { return -lambda_prime(t); });
  double worst = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i)
    worst = std::max(worst,
                     (direct.states[i].amps() - transformed.states[i].amps()).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace nlqd
