#pragma once

// Executable no-signalling properties. Each check returns a replayable
// PropertyReport; "control" checks run a configuration where the property is
// expected to break and must therefore fail.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlqd/dynamics.hpp"
#include "nlqd/hilbert.hpp"
#include "nlqd/parallel.hpp"
#include "nlqd/protocols.hpp"

namespace nlqd {

struct PropertyReport {
  std::string name;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool control = false;
  std::string run_config;

  /// Controls are expected to fail.
  bool as_expected() const { return control ? !passed : passed; }

  nlohmann::json to_json() const {
    return {{"name", name},
            {"max_violation", max_violation},
            {"tolerance", tolerance},
            {"passed", passed},
            {"control", control},
            {"as_expected", as_expected()},
            {"run_config", run_config}};
  }
};

struct CheckConfig {
  std::uint64_t seed = 20240917;
  std::size_t cases = 6;
  double t_end = 50.0;
  double dt = 1e-3;
  std::size_t sample_every = 100;
  double entry_bound = 2.0;  ///< diagonal in [-b, b], off-diagonal in the complex disc of radius b
  double g_max = 3.0;
  /// Overrides every tolerance when finite; a test hook.
  double tolerance_override = std::numeric_limits<double>::quiet_NaN();

  TimeGrid grid() const { return {t_end, dt, sample_every}; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "seed=" << seed << " cases=" << cases << " t_end=" << t_end << " dt=" << dt
       << " sample_every=" << sample_every << " entry_bound=" << entry_bound << " g_max=" << g_max;
    return os.str();
  }
};

inline constexpr double kToleranceFloor = 1e-8;
inline constexpr double kToleranceCeiling = 1e-6;

/// Deterministic sampler for the random batteries.
class RandomSystems {
 public:
  explicit RandomSystems(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  Complex disc(double radius) {
    const double r = radius * std::sqrt(uniform(0.0, 1.0));
    return std::polar(r, uniform(0.0, 2.0 * M_PI));
  }

  HermitianMatrix hermitian(std::size_t dim, double bound) {
    const auto n = static_cast<Eigen::Index>(dim);
    CMatrix m = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      m(i, i) = uniform(-bound, bound);
      for (Eigen::Index j = i + 1; j < n; ++j) {
        m(i, j) = disc(bound);
        m(j, i) = std::conj(m(i, j));
      }
    }
    return HermitianMatrix(std::move(m));
  }

  HermitianMatrix diagonal(std::size_t dim, double bound) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = uniform(-bound, bound);
    return HermitianMatrix::diagonal(v);
  }

  CVector gaussian_vector(std::size_t dim) {
    std::normal_distribution<double> n;
    CVector v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = Complex(n(rng_), n(rng_));
    return v;
  }

  StateVector state(const BipartiteShape& shape) {
    return StateVector::normalized(shape, gaussian_vector(shape.total()));
  }

  Projector rank_one_projector(std::size_t dim) { return Projector::onto(gaussian_vector(dim)); }

 private:
  std::mt19937_64 rng_;
};

namespace detail {

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Step-halving estimate of the integrator's error on one configuration,
/// together with its norm drift.
inline double measured_drift(const StateVector& psi0, const HamiltonianPair& h, const Nonlinearity& nl,
                             const TimeGrid& grid) {
  const Trajectory coarse = integrate(psi0, h, nl, grid);
  TimeGrid fine = grid;
  fine.dt = grid.dt / 2.0;
  fine.sample_every = grid.sample_every * 2;
  const Trajectory refined = integrate(psi0, h, nl, fine);
  double worst = coarse.max_norm_drift();
  for (std::size_t i = 0; i < coarse.size(); ++i)
    worst = std::max(worst, (coarse.states[i].amps() - refined.states[i].amps()).cwiseAbs().maxCoeff());
  return worst;
}

/// Ten times the measured drift, kept within [1e-8, 1e-6].
inline double tolerance_for(const CheckConfig& cfg, double drift) {
  if (std::isfinite(cfg.tolerance_override)) return cfg.tolerance_override;
  return std::clamp(10.0 * drift, kToleranceFloor, kToleranceCeiling);
}

inline PropertyReport make_report(std::string name, double violation, double tol, bool control, std::string config) {
  PropertyReport r;
  r.name = std::move(name);
  r.max_violation = violation;
  r.tolerance = tol;
  r.passed = std::isfinite(violation) && violation <= tol;
  r.control = control;
  r.run_config = std::move(config);
  return r;
}

/// max_t max_k |<k|rho(t)|k> - <k|rho(0)|k>|
inline double diagonal_drift(const std::vector<DensityMatrix>& rhos) {
  double worst = 0.0;
  const CMatrix& first = rhos.front().matrix();
  for (const auto& r : rhos)
    worst = std::max(worst, (r.matrix().diagonal() - first.diagonal()).cwiseAbs().maxCoeff());
  return worst;
}

inline double series_gap(const ReducedSeries& a, const ReducedSeries& b, bool diagonal_only = false) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CMatrix& x = a.rhos[i].matrix();
    const CMatrix& y = b.rhos[i].matrix();
    worst = std::max(worst, diagonal_only ? (x.diagonal() - y.diagonal()).cwiseAbs().maxCoeff()
                                          : max_abs_diff(x, y));
  }
  return worst;
}

inline std::string qubit_config(const QubitParams& p, const std::string& extra = {}) {
  std::ostringstream os;
  os.precision(17);
  os << "a1=" << p.a1 << " a2=" << p.a2 << " b1=" << p.b1 << " b2=" << p.b2 << " c=" << p.c << " d=" << p.d
     << " g=" << p.g;
  if (!extra.empty()) os << ' ' << extra;
  return os.str();
}

inline std::vector<BipartiteShape> battery_shapes() { return {{2, 2}, {3, 2}, {2, 3}}; }

}  // namespace detail

/// <k|rho_B(t)|k'> for diagonal Hamiltonians, written directly from the
/// initial moduli and phases; independent of the integrator and of H_A.
inline DensityMatrix rho_b_closed_form(const StateVector& psi0, const Eigen::VectorXd& b, const Nonlinearity& nl,
                                       double t) {
  const auto& s = psi0.shape();
  const auto db = static_cast<Eigen::Index>(s.dim_b());
  CMatrix rho = CMatrix::Zero(db, db);
  for (std::size_t k = 0; k < s.dim_b(); ++k) {
    for (std::size_t kp = 0; kp < s.dim_b(); ++kp) {
      Complex acc{};
      for (std::size_t j = 0; j < s.dim_a(); ++j) {
        const Complex a = psi0(j, k);
        const Complex ap = psi0(j, kp);
        const double mod = std::abs(a) * std::abs(ap);
        const double freq = b[static_cast<Eigen::Index>(k)] - b[static_cast<Eigen::Index>(kp)] +
                            nl.f(s.index(j, k), std::abs(a)) - nl.f(s.index(j, kp), std::abs(ap));
        acc += mod * std::polar(1.0, -freq * t + std::arg(a) - std::arg(ap));
      }
      rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(kp)) = acc;
    }
  }
  return DensityMatrix::trusted(std::move(rho));
}

/// Integrator against the closed-form diagonal solution.
inline PropertyReport check_prop1(const CheckConfig& cfg) {
  RandomSystems rs(cfg.seed);
  const auto grid = cfg.grid();
  double violation = 0.0;
  const auto shapes = detail::battery_shapes();
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const auto& shape = shapes[c % shapes.size()];
    const HamiltonianPair h{rs.diagonal(shape.dim_a(), cfg.entry_bound), rs.diagonal(shape.dim_b(), cfg.entry_bound)};
    const auto nl = Nonlinearity::gross_pitaevskii(rs.uniform(0.0, cfg.g_max));
    const StateVector psi0 = rs.state(shape);
    const Trajectory traj = integrate(psi0, h, nl, grid);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const StateVector exact = analytic_diagonal_evolve(psi0, h, nl, traj.times[i]);
      violation = std::max(violation, (traj.states[i].amps() - exact.amps()).cwiseAbs().maxCoeff());
    }
  }
  // The comparison is itself the integrator error, so the stated 1e-6 applies.
  const double tol = std::isfinite(cfg.tolerance_override) ? cfg.tolerance_override : kToleranceCeiling;
  return detail::make_report("prop1_analytic_diagonal", violation, tol, false, cfg.describe());
}

/// Diagonal of rho_B constant when H_B is diagonal (and mirrored for rho_A).
inline PropertyReport check_prop2(const CheckConfig& cfg) {
  RandomSystems rs(cfg.seed + 1);
  const auto grid = cfg.grid();
  double violation = 0.0;
  double drift = 0.0;
  const auto shapes = detail::battery_shapes();
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const auto& shape = shapes[c % shapes.size()];
    const auto nl = Nonlinearity::gross_pitaevskii(rs.uniform(0.0, cfg.g_max));
    const StateVector psi0 = rs.state(shape);
    // Bob diagonal, Alice arbitrary.
    const HamiltonianPair hb{rs.hermitian(shape.dim_a(), cfg.entry_bound), rs.diagonal(shape.dim_b(), cfg.entry_bound)};
    const Trajectory tb = integrate(psi0, hb, nl, grid);
    std::vector<DensityMatrix> rb, ra;
    for (const auto& s : tb.states) rb.push_back(partial_trace_b(s));
    violation = std::max(violation, detail::diagonal_drift(rb));
    // Mirror: Alice diagonal, Bob arbitrary.
    const HamiltonianPair ha{rs.diagonal(shape.dim_a(), cfg.entry_bound), rs.hermitian(shape.dim_b(), cfg.entry_bound)};
    const Trajectory ta = integrate(psi0, ha, nl, grid);
    for (const auto& s : ta.states) ra.push_back(partial_trace_a(s));
    violation = std::max(violation, detail::diagonal_drift(ra));
    drift = std::max({drift, detail::measured_drift(psi0, hb, nl, grid), detail::measured_drift(psi0, ha, nl, grid)});
  }
  return detail::make_report("prop2_constant_diagonal", violation, detail::tolerance_for(cfg, drift), false,
                             cfg.describe());
}

/// Prop. 2 on one qubit configuration: max_t |n_z(t) - n_z(0)|.
inline PropertyReport check_prop2_config(const std::string& name, const QubitParams& p, const StateVector& psi0,
                                         const CheckConfig& cfg, bool control) {
  const auto grid = cfg.grid();
  const auto h = p.hamiltonians();
  const auto nl = p.nonlinearity();
  const ReducedSeries s = reduced_series(integrate(psi0, h, nl, grid));
  double violation = 0.0;
  for (const auto& b : s.blochs) violation = std::max(violation, std::abs(b.z - s.blochs.front().z));
  const double drift = detail::measured_drift(psi0, h, nl, grid);
  return detail::make_report(name, violation, detail::tolerance_for(cfg, drift), control,
                             detail::qubit_config(p, cfg.describe()));
}

/// Configuration with d = 0: Bob's trajectory stays in the z = 0 plane.
inline QubitParams z_plane_params(double a1 = 2.0) { return {a1, 1.0, 2.0, 1.0, {2.0, 0.0}, {0.0, 0.0}, 3.0}; }

/// Same shape of run with a non-diagonal H_B; the constancy must break.
inline QubitParams bloch_trajectory_params() { return {0.1, 0.0, 0.0, 0.0, {0.1, 0.0}, {0.3, 0.0}, 2.0}; }

/// Bob's reduced state independent of Alice's diagonal parameters, and equal
/// to the closed form, when both Hamiltonians are diagonal.
inline PropertyReport check_prop3(const CheckConfig& cfg) {
  RandomSystems rs(cfg.seed + 2);
  const auto grid = cfg.grid();
  double violation = 0.0;
  double drift = 0.0;
  const auto shapes = detail::battery_shapes();
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const auto& shape = shapes[c % shapes.size()];
    const auto nl = Nonlinearity::gross_pitaevskii(rs.uniform(0.0, cfg.g_max));
    const StateVector psi0 = rs.state(shape);
    const HermitianMatrix hb = rs.diagonal(shape.dim_b(), cfg.entry_bound);
    const HamiltonianPair base{rs.diagonal(shape.dim_a(), cfg.entry_bound), hb};
    const ReducedSeries ref = reduced_series(integrate(psi0, base, nl, grid));
    for (int alt = 0; alt < 3; ++alt) {
      Eigen::VectorXd a(static_cast<Eigen::Index>(shape.dim_a()));
      for (auto& x : a) x = alt == 0 ? 0.0 : (alt == 1 ? 1.0 : 7.0) + rs.uniform(-1.0, 1.0);
      const HamiltonianPair other{HermitianMatrix::diagonal(a), hb};
      const auto arms = protocol_intervention(psi0, base, other, nl, grid, 1);
      violation = std::max(violation, detail::series_gap(arms.first, arms.second));
      drift = std::max(drift, detail::measured_drift(psi0, other, nl, grid));
    }
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const DensityMatrix closed = rho_b_closed_form(psi0, hb.diagonal_values(), nl, ref.times[i]);
      violation = std::max(violation, detail::max_abs_diff(ref.rhos[i].matrix(), closed.matrix()));
    }
    drift = std::max(drift, detail::measured_drift(psi0, base, nl, grid));
  }
  return detail::make_report("prop3_intervention_invariance", violation, detail::tolerance_for(cfg, drift), false,
                             cfg.describe());
}

/// Local intervention a1 -> a1' on a qubit configuration.
inline PropertyReport check_prop3_config(const std::string& name, const QubitParams& p, double a1_prime,
                                         const StateVector& psi0, const CheckConfig& cfg, bool control) {
  const auto grid = cfg.grid();
  QubitParams q = p;
  q.a1 = a1_prime;
  const auto arms = protocol_intervention(psi0, p.hamiltonians(), q.hamiltonians(), p.nonlinearity(), grid, 1);
  const double violation = detail::series_gap(arms.first, arms.second);
  const double drift = detail::measured_drift(psi0, p.hamiltonians(), p.nonlinearity(), grid);
  std::ostringstream extra;
  extra.precision(17);
  extra << "a1'=" << a1_prime << ' ' << cfg.describe();
  return detail::make_report(name, violation, detail::tolerance_for(cfg, drift), control,
                             detail::qubit_config(p, extra.str()));
}

/// Intervention parameters with c, d != 0; Bob sees Alice's change of a1.
inline QubitParams intervention_params() { return {0.3, 0.1, 0.1, 0.1, {0.4, 0.0}, {0.1, 0.0}, 1.0}; }

/// Diagonal of rho_B unaffected by measuring a random observable on A when
/// H_B is diagonal.
inline PropertyReport check_prop4(const CheckConfig& cfg) {
  RandomSystems rs(cfg.seed + 3);
  const auto grid = cfg.grid();
  double violation = 0.0;
  double drift = 0.0;
  const auto shapes = detail::battery_shapes();
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const auto& shape = shapes[c % shapes.size()];
    const auto nl = Nonlinearity::gross_pitaevskii(rs.uniform(0.0, cfg.g_max));
    const StateVector psi0 = rs.state(shape);
    const HamiltonianPair h{rs.hermitian(shape.dim_a(), cfg.entry_bound), rs.diagonal(shape.dim_b(), cfg.entry_bound)};
    const HermitianMatrix m = rs.hermitian(shape.dim_a(), cfg.entry_bound);
    const ReducedSeries unmeasured = evolve_ensemble(BranchEnsemble::pure(psi0), h, nl, grid, 1);
    const ReducedSeries measured = evolve_ensemble(measure_observable(psi0, m), h, nl, grid, 1);
    violation = std::max(violation, detail::series_gap(unmeasured, measured, true));
    violation = std::max(violation, detail::diagonal_drift(measured.rhos));
    drift = std::max(drift, detail::measured_drift(psi0, h, nl, grid));
  }
  return detail::make_report("prop4_measurement_invariance", violation, detail::tolerance_for(cfg, drift), false,
                             cfg.describe());
}

/// Measure-or-not on a qubit configuration, comparing diagonals of rho_B.
inline PropertyReport check_prop4_config(const std::string& name, const QubitParams& p, const StateVector& psi0,
                                         const Projector& x, const CheckConfig& cfg, bool control) {
  const auto grid = cfg.grid();
  const auto arms = protocol_measure_or_not(psi0, x, p.hamiltonians(), p.nonlinearity(), grid, 1);
  const double violation = detail::series_gap(arms.first, arms.second, true);
  const double drift = detail::measured_drift(psi0, p.hamiltonians(), p.nonlinearity(), grid);
  return detail::make_report(name, violation, detail::tolerance_for(cfg, drift), control,
                             detail::qubit_config(p, cfg.describe()));
}

/// Measure-or-not parameters: a1 = a2 = b2 = 1, b1 = c = d = 2, g = 3.
inline QubitParams measure_or_not_params() { return {1.0, 1.0, 2.0, 1.0, {2.0, 0.0}, {2.0, 0.0}, 3.0}; }

/// (|00> + |01> + |10>)/sqrt(3)
inline StateVector three_term_state() {
  CVector v(4);
  v << 1.0, 1.0, 1.0, 0.0;
  return StateVector::normalized(BipartiteShape::qubits(), std::move(v));
}

inline constexpr double kLinearLimitTolerance = 1e-7;

/// With g = 0 none of the three protocols changes Bob's state; trace
/// distance bounds the signal of every observable on B.
inline PropertyReport check_linear_limit(const CheckConfig& cfg, std::size_t battery = 30) {
  RandomSystems rs(cfg.seed + 4);
  TimeGrid grid = cfg.grid();
  grid.t_end = std::min(grid.t_end, 20.0);
  const auto nl = Nonlinearity::none();
  double violation = 0.0;
  const auto shapes = detail::battery_shapes();
  for (std::size_t c = 0; c < battery; ++c) {
    const auto& shape = shapes[c % shapes.size()];
    const StateVector psi0 = rs.state(shape);
    const HamiltonianPair h{rs.hermitian(shape.dim_a(), cfg.entry_bound), rs.hermitian(shape.dim_b(), cfg.entry_bound)};
    const Projector x = rs.rank_one_projector(shape.dim_a());
    const Projector xp = rs.rank_one_projector(shape.dim_a());
    const HamiltonianPair hp{rs.hermitian(shape.dim_a(), cfg.entry_bound), h.h_b};
    switch (c % 3) {
      case 0: {
        const auto arms = protocol_observable_choice(psi0, x, xp, h, nl, grid, 1);
        violation = std::max(violation, max_of(trace_distance_series(arms.first, arms.second)));
        break;
      }
      case 1: {
        const auto arms = protocol_measure_or_not(psi0, x, h, nl, grid, 1);
        violation = std::max(violation, max_of(trace_distance_series(arms.first, arms.second)));
        break;
      }
      default: {
        const auto arms = protocol_intervention(psi0, h, hp, nl, grid, 1);
        violation = std::max(violation, max_of(trace_distance_series(arms.first, arms.second)));
        break;
      }
    }
  }
  const double tol = std::isfinite(cfg.tolerance_override) ? cfg.tolerance_override : kLinearLimitTolerance;
  return detail::make_report("linear_limit_no_signalling", violation, tol, false,
                             cfg.describe() + " battery=" + std::to_string(battery));
}

/// | ||psi(t)|| - 1 | over random configurations.
inline PropertyReport check_norm_conservation(const CheckConfig& cfg) {
  RandomSystems rs(cfg.seed + 5);
  const auto grid = cfg.grid();
  double violation = 0.0;
  const auto shapes = detail::battery_shapes();
  for (std::size_t c = 0; c < cfg.cases; ++c) {
    const auto& shape = shapes[c % shapes.size()];
    const HamiltonianPair h{rs.hermitian(shape.dim_a(), cfg.entry_bound), rs.hermitian(shape.dim_b(), cfg.entry_bound)};
    const auto nl = Nonlinearity::gross_pitaevskii(rs.uniform(0.0, cfg.g_max));
    violation = std::max(violation, integrate(rs.state(shape), h, nl, grid).max_norm_drift());
  }
  const double tol = std::isfinite(cfg.tolerance_override) ? cfg.tolerance_override : kToleranceCeiling;
  return detail::make_report("norm_conservation", violation, tol, false, cfg.describe());
}

/// exp(i lambda(t)) psi(t) solves the equation with H - lambda'(t) 1.
inline PropertyReport check_gauge(const CheckConfig& cfg) {
  RandomSystems rs(cfg.seed + 6);
  const auto grid = cfg.grid();
  double violation = 0.0;
  double drift = 0.0;
  for (std::size_t c = 0; c < std::max<std::size_t>(1, cfg.cases / 2); ++c) {
    const auto shape = BipartiteShape::qubits();
    const HamiltonianPair h{rs.hermitian(2, cfg.entry_bound), rs.hermitian(2, cfg.entry_bound)};
    const auto nl = Nonlinearity::gross_pitaevskii(rs.uniform(0.0, cfg.g_max));
    const StateVector psi0 = rs.state(shape);
    violation = std::max(violation, gauge_mismatch(psi0, h, nl, grid, [](double t) { return t; },
                                                   [](double) { return 1.0; }));
    violation = std::max(violation, gauge_mismatch(psi0, h, nl, grid, [](double t) { return 0.5 * std::sin(t); },
                                                   [](double t) { return 0.5 * std::cos(t); }));
    drift = std::max(drift, detail::measured_drift(psi0, h, nl, grid));
  }
  return detail::make_report("gauge_symmetry", violation, detail::tolerance_for(cfg, drift), false, cfg.describe());
}

/// Witness state for the non-commutation of H_A (x) 1 with K.
inline StateVector noncommutation_witness_state() {
  CVector v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  return StateVector::normalized(BipartiteShape::qubits(), std::move(v));
}

/// Control: the "commutation" (H_A (x) 1) K(psi) = K((H_A (x) 1) psi) fails
/// for H_A = diag(1, 2), g = 1 on the witness state.
inline PropertyReport check_noncommutation(const CheckConfig& cfg) {
  const StateVector psi = noncommutation_witness_state();
  Eigen::VectorXd a(2);
  a << 1.0, 2.0;
  const CMatrix ha = HermitianMatrix::diagonal(a).matrix();
  const auto nl = Nonlinearity::gross_pitaevskii(1.0);
  const CVector lhs = apply_on_a(ha, StateVector::unchecked(psi.shape(), self_potential(psi, nl)));
  const CVector rhs_v = self_potential(StateVector::unchecked(psi.shape(), apply_on_a(ha, psi)), nl);
  const double violation = (lhs - rhs_v).cwiseAbs().maxCoeff();
  const double tol = std::isfinite(cfg.tolerance_override) ? cfg.tolerance_override : kToleranceCeiling;
  return detail::make_report("control_commutation_HA_K", violation, tol, true,
                             "H_A=diag(1,2) g=1 psi=(1,2,3,4)/sqrt(30)");
}

/// The full suite: property checks plus their sharpness controls.
inline std::vector<PropertyReport> run_suite(const CheckConfig& cfg, std::size_t jobs = 0) {
  const StateVector bell = bell_state();
  std::vector<std::function<PropertyReport()>> checks = {
      [&] { return check_prop1(cfg); },
      [&] { return check_prop2(cfg); },
      [&] { return check_prop2_config("prop2_z_plane", z_plane_params(2.0), bell, cfg, false); },
      [&] { return check_prop2_config("control_prop2_nondiagonal_hb", bloch_trajectory_params(), bell, cfg, true); },
      [&] { return check_prop3(cfg); },
      [&] { return check_prop3_config("control_prop3_nondiagonal", intervention_params(), 0.2, bell, cfg, true); },
      [&] { return check_prop4(cfg); },
      [&] {
        return check_prop4_config("control_prop4_nondiagonal_hb", measure_or_not_params(), three_term_state(),
                                  Projector::basis(2, 0), cfg, true);
      },
      [&] { return check_linear_limit(cfg); },
      [&] { return check_norm_conservation(cfg); },
      [&] { return check_gauge(cfg); },
      [&] { return check_noncommutation(cfg); },
  };
  return parallel_map(checks.size(), [&](std::size_t i) { return checks[i](); }, jobs);
}

inline bool suite_ok(const std::vector<PropertyReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const PropertyReport& r) { return r.as_expected(); });
}

}  // namespace nlqd
