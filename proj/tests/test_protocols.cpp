#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlqd/protocols.hpp"

using namespace nlqd;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Projector plus() { return Projector::onto((CVector(2) << kInvSqrt2, kInvSqrt2).finished()); }

StateVector three_term() {
  CVector v(4);
  v << 1, 1, 1, 0;
  return StateVector::normalized(BipartiteShape::qubits(), v);
}

QubitParams fig7_params() { return {1, 1, 2, 1, {1, 0}, {2, 0}, 3}; }

}  // namespace

TEST(Projector, Validation) {
  CMatrix m(2, 2);
  m << 1, 0, 0, 0.5;
  EXPECT_THROW(Projector(HermitianMatrix(m)), ValidationError);
  EXPECT_THROW(Projector::onto(CVector::Zero(2)), DomainError);
  const auto p = Projector::basis(3, 1);
  EXPECT_LT((p.matrix() + p.complement().matrix() - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(Projector::basis(2, 0).commutes_with(Projector::basis(2, 1)));
  EXPECT_FALSE(Projector::basis(2, 0).commutes_with(plus()));
}

TEST(ApplyOnA, MatchesKroneckerProduct) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  CVector v(6);
  for (auto& x : v) x = Complex(n(rng), n(rng));
  const auto s = StateVector::normalized({3, 2}, v);
  CMatrix p = Projector::onto((CVector(3) << 1, Complex(0, 1), 2).finished()).matrix();
  const CMatrix full = Eigen::kroneckerProduct(p, CMatrix::Identity(2, 2)).eval();
  EXPECT_LT((apply_on_a(p, s) - full * s.amps()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Measurement, BellCollapsesToBasisBranches) {
  const auto ens = measure_on_a(bell_state(), Projector::basis(2, 0));
  ASSERT_EQ(ens.size(), 2u);
  EXPECT_NEAR(ens.branches()[0].weight, 0.5, 1e-15);
  EXPECT_NEAR(overlap(ens.branches()[0].state, basis_state(BipartiteShape::qubits(), 0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(overlap(ens.branches()[1].state, basis_state(BipartiteShape::qubits(), 1, 1)), 1.0, 1e-15);
}

TEST(Measurement, ZeroProbabilityBranchIsPruned) {
  const auto ens = measure_on_a(basis_state(BipartiteShape::qubits(), 0, 1), Projector::basis(2, 0));
  EXPECT_EQ(ens.size(), 1u);
  EXPECT_DOUBLE_EQ(ens.total_weight(), 1.0);
}

TEST(Measurement, RejectsIncompleteProjectorSet) {
  EXPECT_THROW(measure_spectral(bell_state(), {Projector::basis(2, 0)}), ValidationError);
  EXPECT_THROW(measure_spectral(bell_state(), {Projector::basis(3, 0), Projector::basis(3, 1)}), ShapeError);
}

TEST(Measurement, InstantaneousNoSignalling) {
  // Before any evolution, Bob's mixture is the same whichever projector Alice uses.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 10; ++rep) {
    CVector v(6), w(3);
    for (auto& x : v) x = Complex(n(rng), n(rng));
    for (auto& x : w) x = Complex(n(rng), n(rng));
    const auto s = StateVector::normalized({3, 2}, v);
    const auto ens = measure_on_a(s, Projector::onto(w));
    EXPECT_LT((ens.reduced_b().matrix() - partial_trace_b(s).matrix()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Measurement, SpectralProjectorsGroupDegenerateEigenvalues) {
  const auto ps = spectral_projectors(HermitianMatrix::diagonal(Eigen::Vector3d(1.0, 2.0, 1.0)));
  ASSERT_EQ(ps.size(), 2u);
  EXPECT_NEAR(ps[0].matrix().trace().real(), 2.0, 1e-12);
  const auto ens = measure_observable(basis_state({3, 2}, 1, 0), HermitianMatrix::identity(3));
  EXPECT_EQ(ens.size(), 1u);
}

TEST(BranchEnsemble, WeightValidation) {
  const auto s = bell_state();
  EXPECT_THROW(BranchEnsemble({{0.4, s}, {0.4, s}}), ValidationError);
  EXPECT_THROW(BranchEnsemble({{-0.1, s}, {1.1, s}}), ValidationError);
  EXPECT_THROW(BranchEnsemble({{0.5, s}, {0.5, basis_state({3, 2}, 0, 0)}}), ShapeError);
  EXPECT_NO_THROW(BranchEnsemble({{0.25, s}, {0.75, s}}));
}

TEST(Protocols, LinearDynamicsNeverSignals) {
  const auto p = fig7_params();
  const auto h = p.hamiltonians();
  const auto nl = Nonlinearity::none();
  const TimeGrid grid{10.0, 1e-3, 100};
  const auto obs = Projector::basis(2, 0).hermitian();
  auto a = protocol_observable_choice(bell_state(), Projector::basis(2, 0), plus(), h, nl, grid);
  EXPECT_LT(max_of(trace_distance_series(a.first, a.second)), 1e-7);
  auto b = protocol_measure_or_not(three_term(), Projector::basis(2, 0), h, nl, grid);
  EXPECT_LT(max_of(distinguishability(b.first, b.second, obs)), 1e-7);
  QubitParams q = p;
  q.a1 = 0.2;
  q.c = {0.7, -0.3};
  auto c = protocol_intervention(bell_state(), h, q.hamiltonians(), nl, grid);
  EXPECT_LT(max_of(trace_distance_series(c.first, c.second)), 1e-7);
}

TEST(Protocols, NonlinearObservableChoiceSignals) {
  const auto p = fig7_params();
  const auto out = protocol_observable_choice(bell_state(), Projector::basis(2, 0), plus(), p.hamiltonians(),
                                              p.nonlinearity(), {30.0, 1e-3, 20});
  const auto d = distinguishability(out.first, out.second, Projector::basis(2, 0).hermitian());
  EXPECT_LT(d.front(), 1e-14);
  EXPECT_GT(max_of(d), 0.02);
  EXPECT_TRUE(out.warnings.empty());
  const auto td = trace_distance_series(out.first, out.second);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_LE(d[i], td[i] + 1e-12);
}

TEST(Protocols, CommutingChoiceWarns) {
  const auto p = fig7_params();
  const auto out = protocol_observable_choice(bell_state(), Projector::basis(2, 0), Projector::basis(2, 1),
                                              p.hamiltonians(), p.nonlinearity(), {1.0, 1e-2, 10});
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Protocols, DiagonalBobHamiltonianHidesMeasurement) {
  const QubitParams p{1, 1, 2, 1, {2, 0}, {0, 0}, 3};
  const auto out = protocol_measure_or_not(three_term(), Projector::basis(2, 0), p.hamiltonians(),
                                           p.nonlinearity(), {30.0, 1e-3, 50});
  double worst = 0.0;
  for (std::size_t i = 0; i < out.first.size(); ++i)
    worst = std::max(worst, (out.first.rhos[i].matrix().diagonal() - out.second.rhos[i].matrix().diagonal())
                                .cwiseAbs()
                                .maxCoeff());
  EXPECT_LT(worst, 1e-6);
}

TEST(Protocols, InterventionRequiresSameBobHamiltonian) {
  const auto p = fig7_params();
  QubitParams q = p;
  q.b1 = 5.0;
  EXPECT_THROW(protocol_intervention(bell_state(), p.hamiltonians(), q.hamiltonians(), p.nonlinearity(),
                                     {1.0, 1e-2, 10}),
               PreconditionError);
}

TEST(Protocols, DiagonalInterventionIsInvisible) {
  const QubitParams p{0.0, 0.4, -1.0, 0.7, {0, 0}, {0, 0}, 3};
  QubitParams q = p;
  q.a1 = 7.0;
  const auto out = protocol_intervention(family_psi_x(0.3), p.hamiltonians(), q.hamiltonians(), p.nonlinearity(),
                                         {20.0, 1e-3, 100});
  EXPECT_LT(max_of(trace_distance_series(out.first, out.second)), 1e-6);
}

TEST(Protocols, BranchDivergenceIsTagged) {
  const HamiltonianPair h{HermitianMatrix::diagonal(Eigen::Vector2d(1e200, 0)), HermitianMatrix::zero(2)};
  try {
    evolve_ensemble(measure_on_a(bell_state(), Projector::basis(2, 0)), h, Nonlinearity::none(), {5.0, 1.0, 1},
                    1);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.branch(), 0);
  }
}

TEST(Metrics, MisalignedSeriesRejected) {
  ReducedSeries a = reduced_series(std::vector<double>{0.0, 1.0},
                                   {partial_trace_b(bell_state()), partial_trace_b(bell_state())});
  ReducedSeries b = reduced_series(std::vector<double>{0.0}, {partial_trace_b(bell_state())});
  EXPECT_THROW(trace_distance_series(a, b), ShapeError);
  EXPECT_NEAR(trace_distance(partial_trace_b(basis_state(BipartiteShape::qubits(), 0, 0)),
                             partial_trace_b(basis_state(BipartiteShape::qubits(), 0, 1))),
              1.0, 1e-14);
}
