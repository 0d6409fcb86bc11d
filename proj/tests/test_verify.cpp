#include <gtest/gtest.h>

#include <cmath>

#include "nlqd/verify.hpp"

using namespace nlqd;

namespace {

CheckConfig small_config() {
  CheckConfig c;
  c.cases = 3;
  c.t_end = 10.0;
  return c;
}

}  // namespace

TEST(RandomSystems, DeterministicForSeed) {
  RandomSystems a(42), b(42), c(43);
  const auto ha = a.hermitian(3, 2.0);
  EXPECT_EQ(ha, b.hermitian(3, 2.0));
  EXPECT_FALSE(ha == c.hermitian(3, 2.0));
  const auto h = ha.matrix();
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_LE(std::abs(h(i, i).real()), 2.0);
    for (Eigen::Index j = i + 1; j < 3; ++j) EXPECT_LE(std::abs(h(i, j)), 2.0);
  }
}

TEST(Tolerance, PolicyClampsTenTimesDrift) {
  CheckConfig c;
  EXPECT_DOUBLE_EQ(detail::tolerance_for(c, 1e-12), kToleranceFloor);
  EXPECT_DOUBLE_EQ(detail::tolerance_for(c, 3e-8), 3e-7);
  EXPECT_DOUBLE_EQ(detail::tolerance_for(c, 1e-3), kToleranceCeiling);
  c.tolerance_override = 0.5;
  EXPECT_DOUBLE_EQ(detail::tolerance_for(c, 1e-12), 0.5);
}

TEST(PropertyReport, ControlSemantics) {
  auto ok = detail::make_report("x", 1e-9, 1e-8, false, "cfg");
  EXPECT_TRUE(ok.passed);
  EXPECT_TRUE(ok.as_expected());
  auto control = detail::make_report("c", 0.5, 1e-8, true, "cfg");
  EXPECT_FALSE(control.passed);
  EXPECT_TRUE(control.as_expected());
  EXPECT_FALSE(detail::make_report("n", std::nan(""), 1.0, false, "").passed);
  const auto j = control.to_json();
  EXPECT_EQ(j.at("name"), "c");
  EXPECT_EQ(j.at("as_expected"), true);
  EXPECT_EQ(j.at("run_config"), "cfg");
}

TEST(ClosedForm, MatchesTraceOfAnalyticSolution) {
  RandomSystems rs(5);
  for (auto shape : detail::battery_shapes()) {
    const auto psi = rs.state(shape);
    const HamiltonianPair h{rs.diagonal(shape.dim_a(), 2.0), rs.diagonal(shape.dim_b(), 2.0)};
    const auto nl = Nonlinearity::gross_pitaevskii(2.5);
    for (double t : {0.0, 3.3, 41.0}) {
      const auto a = partial_trace_b(analytic_diagonal_evolve(psi, h, nl, t));
      const auto b = rho_b_closed_form(psi, h.h_b.diagonal_values(), nl, t);
      EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Checks, PropertiesPassOnSmallConfig) {
  const auto cfg = small_config();
  for (const auto& r : {check_prop1(cfg), check_prop2(cfg), check_prop3(cfg), check_prop4(cfg),
                        check_norm_conservation(cfg), check_gauge(cfg)}) {
    EXPECT_TRUE(r.passed) << r.name << " violation " << r.max_violation << " tol " << r.tolerance;
    EXPECT_GE(r.tolerance, kToleranceFloor);
    EXPECT_LE(r.tolerance, kToleranceCeiling);
  }
}

TEST(Checks, ReportsAreReplayable) {
  const auto cfg = small_config();
  const auto a = check_prop4(cfg);
  const auto b = check_prop4(cfg);
  EXPECT_EQ(a.max_violation, b.max_violation);
  EXPECT_EQ(a.run_config, b.run_config);
  EXPECT_NE(a.run_config.find("seed=20240917"), std::string::npos);
}

TEST(Checks, ZPlaneConfiguration) {
  const auto r = check_prop2_config("z", z_plane_params(2.0), bell_state(), small_config(), false);
  EXPECT_TRUE(r.passed);
  const auto p = z_plane_params(2.0);
  const auto series = reduced_series(integrate(bell_state(), p.hamiltonians(), p.nonlinearity(), {30.0, 1e-3, 50}));
  for (const auto& n : series.blochs) EXPECT_LT(std::abs(n.z), 1e-6);
}

TEST(Checks, ControlsFailByWideMargin) {
  const auto cfg = small_config();
  const auto c2 = check_prop2_config("c2", bloch_trajectory_params(), bell_state(), cfg, true);
  const auto c3 = check_prop3_config("c3", intervention_params(), 0.2, bell_state(), cfg, true);
  const auto c4 = check_prop4_config("c4", measure_or_not_params(), three_term_state(), Projector::basis(2, 0),
                                     cfg, true);
  for (const auto& r : {c2, c3, c4, check_noncommutation(cfg)}) {
    EXPECT_FALSE(r.passed) << r.name;
    EXPECT_TRUE(r.as_expected()) << r.name;
    EXPECT_GT(r.max_violation, 1e-2) << r.name;
  }
}

TEST(Checks, LinearLimitBattery) {
  auto cfg = small_config();
  const auto r = check_linear_limit(cfg, 6);
  EXPECT_TRUE(r.passed) << r.max_violation;
}

TEST(Suite, DefaultSeedPasses) {
  const auto reports = run_suite(CheckConfig{});
  EXPECT_EQ(reports.size(), 12u);
  for (const auto& r : reports) EXPECT_TRUE(r.as_expected()) << r.to_json().dump();
  EXPECT_TRUE(suite_ok(reports));
}

TEST(Suite, CorruptedToleranceFails) {
  auto cfg = small_config();
  cfg.tolerance_override = 0.0;
  EXPECT_FALSE(suite_ok(run_suite(cfg)));
  cfg.tolerance_override = 1e9;  // controls would now pass
  EXPECT_FALSE(suite_ok(run_suite(cfg)));
}
