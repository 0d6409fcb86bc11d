#pragma once

// Distances between Bob's trajectories and the finite-window estimate of the
// maximal Lyapunov exponent.

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "nlqd/dynamics.hpp"
#include "nlqd/parallel.hpp"
#include "nlqd/protocols.hpp"

namespace nlqd {

inline double bloch_distance(const BlochVector& n, const BlochVector& m) {
  const double dx = n.x - m.x;
  const double dy = n.y - m.y;
  const double dz = n.z - m.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Euclidean distance on the cylinder B3 x [c1, c2].
inline double cylinder_distance(const BlochVector& n, double c, const BlochVector& m, double c_prime) {
  const double b = bloch_distance(n, m);
  const double dc = c - c_prime;
  return std::sqrt(b * b + dc * dc);
}

/// D(t) on a grid. `values` already include epsilon_shift.
struct DistanceSeries {
  std::vector<double> times;
  std::vector<double> values;
  double epsilon_shift = 0.0;

  std::size_t size() const noexcept { return times.size(); }

  /// log(D(t)/D(0)) per sample.
  std::vector<double> log_ratio() const {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::log(values[i] / values.front());
    return out;
  }
};

/// |<psi(t)|phi(t)>| from two independent integrations.
inline DistanceSeries overlap_series(const StateVector& psi0, const StateVector& phi0, const HamiltonianPair& h,
                                     const Nonlinearity& nl, const TimeGrid& grid, std::size_t jobs = 0) {
  if (psi0.shape() != phi0.shape()) throw ShapeError("overlap of states with different shapes");
  auto runs = parallel_map(
      2, [&](std::size_t i) { return integrate(i == 0 ? psi0 : phi0, h, nl, grid); }, jobs);
  DistanceSeries out{runs[0].times, {}, 0.0};
  out.values.reserve(out.times.size());
  for (std::size_t i = 0; i < out.times.size(); ++i)
    out.values.push_back(overlap(runs[0].states[i], runs[1].states[i]));
  return out;
}

/// Pointwise Bloch distance, or cylinder distance when a parameter offset is
/// given; `epsilon_shift` is added uniformly (D_eps = D + eps).
inline DistanceSeries trajectory_distance_series(const ReducedSeries& run1, const ReducedSeries& run2,
                                                 std::optional<double> parameter_offset = std::nullopt,
                                                 double epsilon_shift = 0.0) {
  detail::check_aligned(run1, run2);
  if (run1.blochs.empty() || run2.blochs.empty())
    throw UnsupportedDimension("Bloch distance requires qubit reduced states");
  if (!(epsilon_shift >= 0.0)) throw DomainError("epsilon shift must be >= 0");
  DistanceSeries out{run1.times, {}, epsilon_shift};
  out.values.reserve(run1.size());
  for (std::size_t i = 0; i < run1.size(); ++i) {
    const double d = parameter_offset ? cylinder_distance(run1.blochs[i], 0.0, run2.blochs[i], *parameter_offset)
                                      : bloch_distance(run1.blochs[i], run2.blochs[i]);
    out.values.push_back(d + epsilon_shift);
  }
  return out;
}

struct LyapunovEstimate {
  double lambda = 0.0;
  double cv = 0.0;
  double t_max = 0.0;
  double delta_lambda = 0.0;
  double delta_cv = 0.0;
  std::size_t points = 0;
  double r_squared = 0.0;  ///< uncentered, as appropriate for a zero-intercept fit
};

inline constexpr std::size_t kMinRegressionPoints = 8;
inline constexpr double kWindowPerturbation = 0.05;

namespace detail {

struct WindowFit {
  double lambda;
  double cv;
  std::size_t points;
  double r_squared;
};

/// Zero-intercept least squares of y_i = log(D(t_i)/D(0)) on t_i in (0, t_max].
inline WindowFit fit_window(const DistanceSeries& s, double t_max) {
  const double d0 = s.values.front();
  const double t0 = s.times.front();
  double sty = 0.0, stt = 0.0, syy = 0.0;
  std::vector<double> slopes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.times[i] - t0;
    if (!(t > 0.0) || t > t_max * (1.0 + 1e-12)) continue;
    const double y = std::log(s.values[i] / d0);
    sty += t * y;
    stt += t * t;
    syy += y * y;
    slopes.push_back(y / t);
  }
  if (slopes.size() < kMinRegressionPoints)
    throw InsufficientData("Lyapunov window holds " + std::to_string(slopes.size()) +
                           " points; at least " + std::to_string(kMinRegressionPoints) + " are needed");
  const double lambda = sty / stt;

  // Coefficient of variation of the pointwise slope estimates y_i / t_i.
  double mean = 0.0;
  for (double v : slopes) mean += v;
  mean /= static_cast<double>(slopes.size());
  double var = 0.0;
  for (double v : slopes) var += (v - mean) * (v - mean);
  const double sigma = std::sqrt(var / static_cast<double>(slopes.size()));
  const double cv = sigma == 0.0 ? 0.0 : sigma / mean;

  const double ss_res = syy - lambda * sty;
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return {lambda, cv, slopes.size(), r2};
}

inline void check_estimable(const DistanceSeries& s) {
  if (s.size() < 2) throw InsufficientData("distance series is empty");
  if (!(s.values.front() > 0.0))
    throw PreconditionError("D(0) = 0; apply an epsilon shift before estimating the exponent");
}

}  // namespace detail

/// lambda = sum t_i y_i / sum t_i^2; deltas are the mean absolute changes
/// when the window end moves by +-5%.
inline LyapunovEstimate estimate_lyapunov(const DistanceSeries& series, double t_max) {
  detail::check_estimable(series);
  if (!(t_max > 0.0)) throw DomainError("Lyapunov window must have t_max > 0");
  const double span = series.times.back() - series.times.front();
  if (t_max > span * (1.0 + 1e-12)) throw DomainError("Lyapunov window extends beyond the series");

  const auto centre = detail::fit_window(series, t_max);
  const auto lower = detail::fit_window(series, t_max * (1.0 - kWindowPerturbation));
  // The upper refit is clipped to the available data.
  const auto upper = detail::fit_window(series, std::min(t_max * (1.0 + kWindowPerturbation), span));

  LyapunovEstimate est;
  est.lambda = centre.lambda;
  est.cv = centre.cv;
  est.t_max = t_max;
  est.points = centre.points;
  est.r_squared = centre.r_squared;
  est.delta_lambda = 0.5 * (std::abs(lower.lambda - centre.lambda) + std::abs(upper.lambda - centre.lambda));
  est.delta_cv = 0.5 * (std::abs(lower.cv - centre.cv) + std::abs(upper.cv - centre.cv));
  return est;
}

/// Largest window end maximizing the regression R^2.
inline double suggest_window(const DistanceSeries& series) {
  detail::check_estimable(series);
  double best_t = 0.0;
  double best_r2 = -1.0;
  std::size_t seen = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double t = series.times[i] - series.times.front();
    if (++seen < kMinRegressionPoints) continue;
    const double r2 = detail::fit_window(series, t).r_squared;
    if (r2 >= best_r2) {
      best_r2 = r2;
      best_t = t;
    }
  }
  if (seen < kMinRegressionPoints) throw InsufficientData("series too short to suggest a window");
  return best_t;
}

/// Bloch-distance series of Bob's states for two initial states.
inline DistanceSeries state_divergence(const StateVector& psi0, const StateVector& phi0, const HamiltonianPair& h,
                                       const Nonlinearity& nl, const TimeGrid& grid, double epsilon_shift = 0.0,
                                       std::size_t jobs = 0) {
  auto runs = parallel_map(
      2, [&](std::size_t i) { return reduced_series(integrate(i == 0 ? psi0 : phi0, h, nl, grid)); }, jobs);
  return trajectory_distance_series(runs[0], runs[1], std::nullopt, epsilon_shift);
}

/// Cylinder-distance series for one initial state under two Hamiltonians
/// whose scanned parameter differs by `offset`.
inline DistanceSeries parameter_divergence(const StateVector& psi0, const HamiltonianPair& h,
                                           const HamiltonianPair& h_prime, double offset, const Nonlinearity& nl,
                                           const TimeGrid& grid, double epsilon_shift = 0.0,
                                           std::size_t jobs = 0) {
  auto runs = parallel_map(
      2, [&](std::size_t i) { return reduced_series(integrate(psi0, i == 0 ? h : h_prime, nl, grid)); }, jobs);
  return trajectory_distance_series(runs[0], runs[1], offset, epsilon_shift);
}

}  // namespace nlqd
