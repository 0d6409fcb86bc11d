#include <gtest/gtest.h>

#include <cmath>

#include "nlqd/chaos.hpp"

using namespace nlqd;

namespace {

DistanceSeries synthetic(double rate, double d0, double t_end, double dt) {
  DistanceSeries s;
  for (int i = 0; i * dt <= t_end + 1e-12; ++i) {
    s.times.push_back(i * dt);
    s.values.push_back(d0 * std::exp(rate * i * dt));
  }
  return s;
}

}  // namespace

TEST(Distances, BlochAndCylinder) {
  const BlochVector n{0.1, 0.2, 0.3}, m{0.1, -0.2, 0.3};
  EXPECT_NEAR(bloch_distance(n, m), 0.4, 1e-15);
  EXPECT_NEAR(cylinder_distance(n, 2.0, n, 2.001), 0.001, 1e-12);
  EXPECT_NEAR(cylinder_distance(n, 0.0, m, 0.3), 0.5, 1e-15);
}

TEST(Lyapunov, ExactOnSyntheticExponential) {
  const auto s = synthetic(0.37, 1e-4, 20.0, 0.1);
  const auto e = estimate_lyapunov(s, 15.0);
  EXPECT_NEAR(e.lambda, 0.37, 1e-12);
  EXPECT_NEAR(e.cv, 0.0, 1e-10);
  EXPECT_NEAR(e.delta_lambda, 0.0, 1e-12);
  EXPECT_NEAR(e.r_squared, 1.0, 1e-12);
  EXPECT_EQ(e.points, 150u);
}

TEST(Lyapunov, CoefficientOfVariationOfPointwiseSlopes) {
  // y = t + t^2 on t = 1..10 gives pointwise slopes 1 + t.
  DistanceSeries s;
  for (int i = 0; i <= 10; ++i) {
    s.times.push_back(i);
    s.values.push_back(std::exp(i + 1.0 * i * i));
  }
  const auto e = estimate_lyapunov(s, 10.0);
  double mean = 0.0, var = 0.0;
  for (int t = 1; t <= 10; ++t) mean += (1.0 + t) / 10.0;
  for (int t = 1; t <= 10; ++t) var += std::pow(1.0 + t - mean, 2) / 10.0;
  EXPECT_NEAR(e.cv, std::sqrt(var) / mean, 1e-12);
  double sty = 0.0, stt = 0.0;
  for (int t = 1; t <= 10; ++t) {
    sty += t * (t + 1.0 * t * t);
    stt += 1.0 * t * t;
  }
  EXPECT_NEAR(e.lambda, sty / stt, 1e-12);
}

TEST(Lyapunov, Preconditions) {
  auto s = synthetic(0.1, 1.0, 1.0, 0.2);
  EXPECT_THROW(estimate_lyapunov(s, 1.0), InsufficientData);
  auto z = synthetic(0.1, 1.0, 10.0, 0.1);
  z.values.front() = 0.0;
  EXPECT_THROW(estimate_lyapunov(z, 5.0), PreconditionError);
  EXPECT_THROW(estimate_lyapunov(synthetic(0.1, 1.0, 10.0, 0.1), 11.0), DomainError);
  EXPECT_THROW(estimate_lyapunov(synthetic(0.1, 1.0, 10.0, 0.1), 0.0), DomainError);
}

TEST(Lyapunov, EpsilonShiftMakesZeroStartEstimable) {
  ReducedSeries r = reduced_series(std::vector<double>{0.0, 1.0},
                                   {partial_trace_b(bell_state()), partial_trace_b(bell_state())});
  const auto d = trajectory_distance_series(r, r, std::nullopt, 1e-3);
  EXPECT_DOUBLE_EQ(d.values.front(), 1e-3);
  EXPECT_THROW(trajectory_distance_series(r, r, std::nullopt, -1.0), DomainError);
}

TEST(Lyapunov, SuggestedWindowStopsAtSaturation) {
  DistanceSeries s;
  for (int i = 0; i <= 400; ++i) {
    const double t = i * 0.1;
    s.times.push_back(t);
    s.values.push_back(1e-5 * std::exp(0.5 * std::min(t, 20.0)));
  }
  const double w = suggest_window(s);
  EXPECT_GE(w, 19.0);
  EXPECT_LE(w, 21.0);
}

TEST(Lyapunov, UpperRefitIsClippedToSpan) {
  const auto s = synthetic(0.2, 1e-3, 10.0, 0.1);
  EXPECT_NO_THROW(estimate_lyapunov(s, 10.0));
}

TEST(Overlap, SeparablePairUnderVanishingHamiltonianIsConstant) {
  const HamiltonianPair h{HermitianMatrix::zero(2), HermitianMatrix::zero(2)};
  const auto s = overlap_series(basis_state(BipartiteShape::qubits(), 0, 0), separable_eps(0.001), h,
                                Nonlinearity::gross_pitaevskii(1.0), {100.0, 1e-3, 100});
  for (double v : s.values) EXPECT_NEAR(v, s.values.front(), 1e-6);
}

TEST(Overlap, DecaysForTunedEntangledPair) {
  const QubitParams p{0.1, 0, 0, 0, {0.413, 0}, {0.108, 0}, 1.0};
  const auto s = overlap_series(bell_state(), family_psi_x(psi_x_for_bell_overlap(0.001)), p.hamiltonians(),
                                p.nonlinearity(), {40.0, 1e-3, 100});
  EXPECT_NEAR(s.values.front(), 0.999, 1e-12);
  double lo = 1.0;
  for (double v : s.values) lo = std::min(lo, v);
  EXPECT_LT(lo, 0.2);
}

TEST(Divergence, TableRowWithinTolerance) {
  const QubitParams p{1, 1, 2, 1, {1, 0}, {2, 0}, 5};
  const auto d = state_divergence(bell_state(), family_psi_x(5e-5), p.hamiltonians(), p.nonlinearity(),
                                  {35.0, 1e-3, 100});
  EXPECT_NEAR(d.values.front(), 1e-4, 1e-8);
  const auto e = estimate_lyapunov(d, 35.0);
  EXPECT_NEAR(e.lambda, 0.2748, 0.25 * 0.2748);
}

TEST(Divergence, ParameterOffsetUsesCylinderMetric) {
  const QubitParams p{1, 0.5, 1, 2, {2, 0}, {2, 0}, 1};
  QubitParams q = p;
  q.c = {2.001, 0};
  const auto d = parameter_divergence(bell_state(), p.hamiltonians(), q.hamiltonians(), 0.001, p.nonlinearity(),
                                      {30.0, 1e-3, 100});
  EXPECT_NEAR(d.values.front(), 0.001, 1e-12);
  EXPECT_GT(estimate_lyapunov(d, 30.0).lambda, 0.0);
}

TEST(Divergence, NonQubitRejected) {
  EXPECT_THROW(state_divergence(basis_state({2, 3}, 0, 0), basis_state({2, 3}, 1, 1),
                                {HermitianMatrix::zero(2), HermitianMatrix::zero(3)}, Nonlinearity::none(),
                                {1.0, 0.1, 1}),
               UnsupportedDimension);
}
