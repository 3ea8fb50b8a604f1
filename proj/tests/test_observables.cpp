#include <gtest/gtest.h>

#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "qtransport/analysis.hpp"
#include "qtransport/evolve.hpp"
#include "qtransport/observables.hpp"

using namespace qtransport;

namespace {

constexpr InitialState kEdge{InitialKind::SSH_LEFT_EDGE, 0};

StateVector run(const ChainSpec& spec, const QuenchProtocol& p, const InitialState& init, double dt = 0.04) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  return evolve(spec, p, initial_state(spec, init), cfg).state;
}

DimerProfile from_plus(std::vector<double> p, int offset = 0) {
  DimerProfile d;
  d.p_minus.assign(p.size(), 0.0);
  d.p_plus = std::move(p);
  d.offset = offset;
  return d;
}

}  // namespace

TEST(DimerProfile, SelfProjection) {
  const ChainSpec spec{Model::SSH, 8, Boundary::OPEN_EVEN, 0.0};
  StateVector s;
  s.amplitudes = ComplexVector::Zero(16);
  s.amplitudes[SiteIndex{5, Sublattice::A}.linear()] = 1.0 / std::sqrt(2.0);
  s.amplitudes[SiteIndex{5, Sublattice::B}.linear()] = 1.0 / std::sqrt(2.0);
  const DimerProfile d = dimer_profile(s, spec, {ProtocolKind::LINEAR, 1e-3});
  for (int n = 1; n <= 8; ++n) {
    EXPECT_NEAR(d.plus(n), n == 5 ? 1.0 : 0.0, 1e-15);
    EXPECT_NEAR(d.minus(n), 0.0, 1e-15);
  }
}

TEST(DimerProfile, EdgeChiralEqualityAndCompleteness) {
  const ChainSpec spec{Model::SSH, 80, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 5e-3};
  const DimerProfile d = dimer_profile(run(spec, p, kEdge, 0.01), spec, p, 1);
  double total = 0.0;
  for (int n = 1; n <= d.size(); ++n) {
    EXPECT_NEAR(d.plus(n), d.minus(n), 1e-6);
    EXPECT_GE(d.plus(n), 0.0);
    total += d.plus(n) + d.minus(n);
  }
  EXPECT_NEAR(total, 1.0, 1e-8);
}

TEST(DimerProfile, BulkMinusBranchIsSmall) {
  const ChainSpec spec{Model::SSH, 1000, Boundary::PERIODIC, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 5e-4};
  const DimerProfile d = dimer_profile(run(spec, p, {InitialKind::SSH_BULK, 500}), spec, p, 500);
  EXPECT_LT(d.total_minus(), 0.05);
  EXPECT_GT(d.total_plus(), 0.9);
}

TEST(DimerProfile, OddChainDropsUnpairedSite) {
  const ChainSpec spec{Model::SSH, 12, Boundary::OPEN_ODD, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.05};
  const DimerProfile d = dimer_profile(run(spec, p, kEdge, 0.01), spec, p, 1);
  EXPECT_EQ(d.size(), 11);
}

TEST(DimerProfile, NonHermitianRescaling) {
  const double gamma = 0.1;
  const double beta = 5e-3;
  const ChainSpec spec{Model::NH_SSH, 100, Boundary::OPEN_EVEN, gamma};
  const QuenchProtocol p{ProtocolKind::NH_LINEAR, beta};
  const StateVector s = run(spec, p, kEdge, 0.01);
  const DimerProfile d = dimer_profile(s, spec, p, 1);
  EXPECT_DOUBLE_EQ(d.rescale_log, -gamma / beta);
  for (int n = 1; n <= d.size(); ++n) {
    EXPECT_TRUE(std::isfinite(d.plus(n)));
    EXPECT_GE(d.plus(n), 0.0);
  }

  // |n,+> is a right eigenvector of the final Hamiltonian and projects onto itself with weight exp(-gamma/beta)
  const Complex c_plus(std::sqrt(1.0 - gamma * gamma), -gamma);
  StateVector dimer;
  dimer.amplitudes = ComplexVector::Zero(site_count(spec));
  dimer.amplitudes[SiteIndex{7, Sublattice::A}.linear()] = 1.0 / std::sqrt(2.0);
  dimer.amplitudes[SiteIndex{7, Sublattice::B}.linear()] = c_plus / std::sqrt(2.0);
  const ComplexVector h_dimer = dense_hamiltonian(spec, {.j1 = 1.0, .j2 = 0.0}) * dimer.amplitudes;
  EXPECT_LE((h_dimer - std::sqrt(1.0 - gamma * gamma) * dimer.amplitudes).norm(), 1e-15);
  const DimerProfile self = dimer_profile(dimer, spec, p, 1);
  EXPECT_NEAR(self.plus(7) / std::exp(-gamma / beta), 1.0, 1e-14);
}

TEST(DimerProfile, RejectsUndimerizedFinalHamiltonian) {
  const ChainSpec ssh{Model::SSH, 6, Boundary::OPEN_EVEN, 0.0};
  const ChainSpec creutz{Model::CREUTZ, 6, Boundary::OPEN_EVEN, 0.0};
  const StateVector s = initial_state(ssh, kEdge);
  EXPECT_THROW((void)dimer_profile(s, ssh, {ProtocolKind::PERIODIC, 1e-2}), ConfigError);
  EXPECT_THROW((void)dimer_profile(initial_state(creutz, {InitialKind::CREUTZ_LEFT_EDGE, 0}), creutz,
                                   {ProtocolKind::CREUTZ_THETA, 1e-2}),
               ConfigError);
  EXPECT_THROW((void)dimer_profile(s, {Model::SSH, 7, Boundary::OPEN_EVEN, 0.0}, {ProtocolKind::LINEAR, 1e-2}),
               ConfigError);
}

TEST(TransportSummary, DeltaProfile) {
  std::vector<double> p(30, 0.0);
  p[16] = 1.0;
  const TransportSummary s = transport_summary(from_plus(p));
  EXPECT_EQ(s.peak_cell, 17);
  EXPECT_DOUBLE_EQ(s.distance, 17.0);
  EXPECT_DOUBLE_EQ(s.width, 0.0);
  EXPECT_DOUBLE_EQ(s.peak, 1.0);
}

TEST(TransportSummary, UniformWidth) {
  for (int a : {1, 3, 7, 12}) {
    std::vector<double> p(60, 0.0);
    const int n0 = 30;
    for (int n = n0 - a; n <= n0 + a; ++n) p[static_cast<std::size_t>(n - 1)] = 1.0 / (2 * a + 1);
    p[static_cast<std::size_t>(n0 - 1)] += 1e-9;  // unique maximum at the centre
    EXPECT_NEAR(transport_summary(from_plus(p)).width, oracle::uniform_width(a), 1e-6) << a;
  }
}

TEST(TransportSummary, WidthIgnoresNormalization) {
  std::vector<double> p{0.0, 0.1, 0.4, 0.2, 0.05};
  std::vector<double> q = p;
  for (double& x : q) x *= 0.37;
  EXPECT_NEAR(transport_summary(from_plus(p)).width, transport_summary(from_plus(q)).width, 1e-14);
}

TEST(TransportSummary, TiesPickSmallestCell) {
  const TransportSummary s = transport_summary(from_plus({0.1, 0.3, 0.2, 0.3, 0.1}));
  EXPECT_EQ(s.peak_cell, 2);
}

TEST(TransportSummary, TranslationCovariance) {
  std::vector<double> p(100, 0.0);
  for (int n = 10; n < 25; ++n) p[static_cast<std::size_t>(n)] = std::exp(-0.1 * (n - 15) * (n - 15));
  const TransportSummary base = transport_summary(from_plus(p, 1));
  for (int shift : {1, 7, 40}) {
    std::vector<double> q(100, 0.0);
    std::copy(p.begin(), p.end() - shift, q.begin() + shift);
    const TransportSummary s = transport_summary(from_plus(q, 1));
    EXPECT_DOUBLE_EQ(s.distance, base.distance + shift);
    EXPECT_NEAR(s.width, base.width, 1e-12);
    EXPECT_DOUBLE_EQ(s.peak, base.peak);
  }
}

TEST(TransportSummary, Errors) {
  EXPECT_THROW((void)transport_summary(from_plus({0.0, 0.0})), ConfigError);
  EXPECT_THROW((void)transport_summary(from_plus({})), ConfigError);
}

TEST(TransportSummary, BulkDistanceNearQuarterOverBeta) {
  const double beta = 1e-3;
  const ChainSpec spec{Model::SSH, 600, Boundary::PERIODIC, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, beta};
  const TransportSummary s = transport_summary(dimer_profile(run(spec, p, {InitialKind::SSH_BULK, 300}), spec, p, 300));
  EXPECT_NEAR(s.distance * beta, 0.24, 0.024);
  EXPECT_LE(s.distance, spec.unit_cells);
  EXPECT_LE(s.peak, 1.0);
}

TEST(TransportSummary, EdgeProfileDecaysFarBeyondDistance) {
  const ChainSpec spec{Model::SSH, 1000, Boundary::OPEN_EVEN, 0.0};
  for (double beta : {2e-4, 1e-3, 3e-3}) {
    const QuenchProtocol p{ProtocolKind::LINEAR, beta};
    const DimerProfile d = dimer_profile(run(spec, p, kEdge), spec, p, 1);
    const TransportSummary s = transport_summary(d);
    // A weak front of slow modes reaches slightly past 3d.
    for (int n = static_cast<int>(3 * s.distance) + 1; n <= d.size(); ++n) EXPECT_LT(d.plus(n), 1e-3 * s.peak) << n;
    for (int n = static_cast<int>(3.5 * s.distance) + 1; n <= d.size(); ++n) EXPECT_LT(d.plus(n), 1e-6) << n;
  }
}

TEST(ReturnProbability, FastQuenchReturns) {
  const ChainSpec spec{Model::SSH, 30, Boundary::OPEN_EVEN, 0.0};
  const double p1a = return_probability(run(spec, {ProtocolKind::PERIODIC, 1e4}, kEdge, 0.01));
  EXPECT_NEAR(p1a, 1.0, 1e-6);
}

TEST(AdiabaticFidelity, SlowQuenchReachesFarEdge) {
  const ChainSpec spec{Model::SSH, 21, Boundary::OPEN_ODD, 0.0};
  EXPECT_NEAR(adiabatic_fidelity(run(spec, {ProtocolKind::LINEAR, 1e-4}, kEdge), spec), 1.0, 0.01);
}

TEST(AdiabaticFidelity, FastQuenchBeyondFormulaZero) {
  const int n = 21;
  const ChainSpec spec{Model::SSH, n, Boundary::OPEN_ODD, 0.0};
  const double beta = 1.5 * 2.0 / (n * n * std::numbers::ln2);
  EXPECT_EQ(fidelity_formula(n, beta), 0.0);
  EXPECT_LE(adiabatic_fidelity(run(spec, {ProtocolKind::LINEAR, beta}, kEdge, 0.01), spec), 0.05);
}

TEST(AdiabaticFidelity, WrongGeometry) {
  const ChainSpec even{Model::SSH, 10, Boundary::OPEN_EVEN, 0.0};
  EXPECT_THROW((void)adiabatic_fidelity(initial_state(even, kEdge), even), ConfigError);
}

TEST(CollapseRescale, ZeroExponentsAreIdentity) {
  const DimerProfile d = from_plus({0.1, 0.5, 0.2}, 1);
  const ScaledCurve c = collapse_rescale(d, 3e-3, 0.0, 0.0);
  ASSERT_EQ(c.x.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(c.y[i], d.p_plus[i]);
    EXPECT_DOUBLE_EQ(c.x[i], static_cast<double>(i + 1) - d.offset);
  }
}

TEST(CollapseRescale, DoublingBetaShrinksAxis) {
  const DimerProfile d = from_plus({0.1, 0.5, 0.2, 0.1}, 0);
  const ScaledCurve a = collapse_rescale(d, 1e-3, 0.61, 0.61);
  const ScaledCurve b = collapse_rescale(d, 2e-3, 0.61, 0.61);
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    EXPECT_NEAR(a.x[i] / b.x[i], std::pow(2.0, -0.61), 1e-14);
    EXPECT_NEAR(b.y[i] / a.y[i], std::pow(2.0, -0.61), 1e-14);
  }
  EXPECT_THROW((void)collapse_rescale(d, 0.0), ConfigError);
}

TEST(NormalizedL1, IdenticalAndDisjoint) {
  const ScaledCurve f{{0.0, 1.0, 2.0, 3.0}, {0.0, 1.0, 1.0, 0.0}};
  EXPECT_NEAR(normalized_l1_distance(f, f), 0.0, 1e-15);
  const ScaledCurve g{{10.0, 11.0, 12.0, 13.0}, {0.0, 1.0, 1.0, 0.0}};
  EXPECT_NEAR(normalized_l1_distance(f, g), 2.0, 1e-2);
  EXPECT_NEAR(normalized_l1_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0, 0.0);
  EXPECT_NEAR(normalized_l1_distance(std::vector<double>{0, 2, 0}, std::vector<double>{0, 1, 0}), 1.0, 1e-15);
}

TEST(CellOccupancy, CreutzThetaEdgeStaysPut) {
  const ChainSpec spec{Model::CREUTZ, 30, Boundary::OPEN_EVEN, 0.0};
  const auto occ = cell_occupancy(run(spec, {ProtocolKind::CREUTZ_THETA, 1e-2}, {InitialKind::CREUTZ_LEFT_EDGE, 0}, 0.01));
  ASSERT_EQ(occ.size(), 30u);
  EXPECT_GE(occ[0], 0.9);
  EXPECT_NEAR(std::accumulate(occ.begin(), occ.end(), 0.0), 1.0, 1e-8);
}
