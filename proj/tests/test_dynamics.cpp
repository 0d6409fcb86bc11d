#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlqd/dynamics.hpp"

using namespace nlqd;

namespace {

StateVector random_state(std::mt19937_64& rng, BipartiteShape shape) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(static_cast<Eigen::Index>(shape.total()));
  for (auto& x : v) x = Complex(n(rng), n(rng));
  return StateVector::normalized(shape, v);
}

HermitianMatrix random_hermitian(std::mt19937_64& rng, std::size_t dim, double bound) {
  std::uniform_real_distribution<double> u(-bound, bound);
  CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, i) = u(rng);
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      m(i, j) = Complex(u(rng), u(rng)) * 0.5;
      m(j, i) = std::conj(m(i, j));
    }
  }
  return HermitianMatrix(m);
}

HermitianMatrix random_diagonal(std::mt19937_64& rng, std::size_t dim, double bound) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
  for (auto& x : d) x = u(rng);
  return HermitianMatrix::diagonal(d);
}

double max_gap(const StateVector& a, const StateVector& b) {
  return (a.amps() - b.amps()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(TimeGrid, SamplesIncludeFinalStep) {
  TimeGrid g{1.05, 0.1, 5};
  const auto steps = g.sample_steps();
  ASSERT_EQ(steps.size(), 4u);
  EXPECT_EQ(steps.back(), 11u);
  const auto t = g.times();
  EXPECT_DOUBLE_EQ(t[1], 0.5);
  EXPECT_THROW((TimeGrid{1.0, 0.0, 1}.validate()), DomainError);
  EXPECT_THROW((TimeGrid{1.0, 0.1, 0}.validate()), DomainError);
  EXPECT_THROW((TimeGrid{-1.0, 0.1, 1}.validate()), DomainError);
}

TEST(Nonlinearity, KindsAndClamp) {
  EXPECT_DOUBLE_EQ(Nonlinearity::gross_pitaevskii(3.0).f(0, 0.5), 0.75);
  EXPECT_DOUBLE_EQ(Nonlinearity::logarithmic(2.0).f(1, std::exp(1.0)), 2.0);
  EXPECT_DOUBLE_EQ(Nonlinearity::logarithmic(1.0).f(0, 0.0), std::log(kLogClamp));
  const auto bad = Nonlinearity::custom({[](double) { return std::nan(""); }});
  EXPECT_THROW(bad.f(0, 0.1), NumericError);
}

TEST(Nonlinearity, OperatorArgument) {
  // A = SWAP on two qubits: |<psi|A|jk>| = |alpha_kj|.
  CMatrix swap = CMatrix::Zero(4, 4);
  swap(0, 0) = swap(3, 3) = 1.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  std::vector<std::optional<HermitianMatrix>> ops(4, HermitianMatrix(swap));
  const auto nl = Nonlinearity::custom({[](double x) { return x; }}, ops);
  CVector v(4);
  v << 0.1, 0.2, 0.3, std::sqrt(1 - 0.14);
  EXPECT_NEAR(nl.argument(v, 1), 0.3, 1e-15);
  EXPECT_NEAR(nl.argument(v, 2), 0.2, 1e-15);
  EXPECT_THROW(nl.check_dimension(6), ShapeError);
}

TEST(Rhs, MatchesDenseGlobalHamiltonian) {
  std::mt19937_64 rng(5);
  for (auto shape : {BipartiteShape(2, 2), BipartiteShape(3, 2), BipartiteShape(2, 4)}) {
    const HamiltonianPair h{random_hermitian(rng, shape.dim_a(), 2.0), random_hermitian(rng, shape.dim_b(), 2.0)};
    const auto nl = Nonlinearity::gross_pitaevskii(1.7);
    const auto s = random_state(rng, shape);
    CVector k(s.amps().size());
    for (Eigen::Index i = 0; i < k.size(); ++i) k[i] = 1.7 * std::norm(s.amps()[i]) * s.amps()[i];
    const CVector expected = Complex(0, -1) * (h.global() * s.amps() + k);
    EXPECT_LT((rhs(s, h, nl) - expected).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((self_potential(s, nl) - k).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Rhs, RejectsMismatchedShapes) {
  const HamiltonianPair h{HermitianMatrix::zero(3), HermitianMatrix::zero(2)};
  EXPECT_THROW(rhs(bell_state(), h, Nonlinearity::none()), ShapeError);
}

TEST(Integrate, FreeLinearEvolutionIsStatic) {
  const HamiltonianPair h{HermitianMatrix::zero(2), HermitianMatrix::zero(2)};
  const auto traj = integrate(family_psi_x(0.3), h, Nonlinearity::none(), {5.0, 1e-2, 10});
  for (const auto& s : traj.states) EXPECT_EQ(max_gap(s, traj.states.front()), 0.0);
}

TEST(Integrate, MatchesAnalyticDiagonalSolution) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 6; ++rep) {
    const BipartiteShape shape = rep % 2 ? BipartiteShape(3, 2) : BipartiteShape(2, 2);
    const HamiltonianPair h{random_diagonal(rng, shape.dim_a(), 3.0), random_diagonal(rng, shape.dim_b(), 3.0)};
    const auto nl = rep == 5 ? Nonlinearity::logarithmic(0.7) : Nonlinearity::gross_pitaevskii(0.5 * rep);
    const auto s = random_state(rng, shape);
    const auto traj = integrate(s, h, nl, {50.0, 1e-3, 1000});
    for (std::size_t i = 0; i < traj.size(); ++i)
      EXPECT_LT(max_gap(traj.states[i], analytic_diagonal_evolve(s, h, nl, traj.times[i])), 1e-6);
  }
}

TEST(Integrate, AnalyticModuliAreConstant) {
  const HamiltonianPair h{HermitianMatrix::diagonal(Eigen::Vector2d(1, 2)),
                          HermitianMatrix::diagonal(Eigen::Vector2d(-1, 0.5))};
  const auto s0 = family_psi_x(0.2);
  const auto st = analytic_diagonal_evolve(s0, h, Nonlinearity::gross_pitaevskii(3), 17.0);
  EXPECT_LT((st.amps().cwiseAbs() - s0.amps().cwiseAbs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Integrate, AnalyticPreconditions) {
  const HamiltonianPair h{HermitianMatrix::qubit(0, 0, {1, 0}), HermitianMatrix::zero(2)};
  EXPECT_THROW(analytic_diagonal_evolve(bell_state(), h, Nonlinearity::none(), 1.0), PreconditionError);
  const HamiltonianPair d{HermitianMatrix::zero(2), HermitianMatrix::zero(2)};
  std::vector<std::optional<HermitianMatrix>> ops(4, HermitianMatrix::identity(4));
  const auto nl = Nonlinearity::custom({[](double x) { return x; }}, ops);
  EXPECT_THROW(analytic_diagonal_evolve(bell_state(), d, nl, 1.0), PreconditionError);
}

TEST(Integrate, StepHalvingShowsFourthOrder) {
  // Diagonal system with a closed-form reference; halving dt cuts the global
  // error by ~2^4.
  const HamiltonianPair h{HermitianMatrix::diagonal(Eigen::Vector2d(1.0, -0.5)),
                          HermitianMatrix::diagonal(Eigen::Vector2d(0.3, 2.0))};
  const auto nl = Nonlinearity::gross_pitaevskii(2.0);
  const auto s = family_psi_x(0.4);
  const auto exact = analytic_diagonal_evolve(s, h, nl, 5.0);
  const double e1 = max_gap(evolve(s, h, nl, 5.0, 0.02), exact);
  const double e2 = max_gap(evolve(s, h, nl, 5.0, 0.01), exact);
  EXPECT_GT(e1 / e2, 8.0);
  EXPECT_LT(e1 / e2, 32.0);
}

TEST(Integrate, NormConservedOnRandomNonlinearSystems) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    const HamiltonianPair h{random_hermitian(rng, 2, 3.0), random_hermitian(rng, 2, 3.0)};
    const auto traj = integrate(random_state(rng, BipartiteShape::qubits()), h,
                                Nonlinearity::gross_pitaevskii(7.0 * rep / 4.0), {20.0, 1e-3, 500});
    EXPECT_LT(traj.max_norm_drift(), 1e-6);
  }
}

TEST(Integrate, DivergenceKeepsPartialTrajectory) {
  const HamiltonianPair h{HermitianMatrix::diagonal(Eigen::Vector2d(1e200, 0)), HermitianMatrix::zero(2)};
  try {
    integrate(bell_state(), h, Nonlinearity::none(), {10.0, 1.0, 1});
    FAIL() << "expected divergence";
  } catch (const IntegrationDivergence& e) {
    EXPECT_GE(e.step(), 1u);
    ASSERT_GE(e.partial().size(), 1u);
    EXPECT_EQ(e.partial().times.front(), 0.0);
  }
}

TEST(Gauge, GlobalPhaseShiftIsASymmetry) {
  std::mt19937_64 rng(17);
  const HamiltonianPair h{random_hermitian(rng, 2, 2.0), random_hermitian(rng, 2, 2.0)};
  const auto s = random_state(rng, BipartiteShape::qubits());
  const TimeGrid grid{10.0, 1e-3, 100};
  const double m = gauge_mismatch(
      s, h, Nonlinearity::gross_pitaevskii(2.0), grid, [](double t) { return 0.5 * std::sin(t); },
      [](double t) { return 0.5 * std::cos(t); });
  EXPECT_LT(m, 1e-8);
}

TEST(Gauge, WrongDerivativeIsDetected) {
  const HamiltonianPair h{HermitianMatrix::qubit(0.1, 0, {0.3, 0}), HermitianMatrix::qubit(0, 0, {0.2, 0})};
  const double m = gauge_mismatch(bell_state(), h, Nonlinearity::gross_pitaevskii(1.0), {5.0, 1e-3, 100},
                                  [](double t) { return t; }, [](double) { return 2.0; });
  EXPECT_GT(m, 0.1);
}
