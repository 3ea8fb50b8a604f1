#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qtransport/evolve.hpp"
#include "qtransport/observables.hpp"

using namespace qtransport;

namespace {

constexpr InitialState kEdge{InitialKind::SSH_LEFT_EDGE, 0};

ComplexVector true_state(const StateVector& s) { return s.amplitudes * std::exp(s.log_scale); }

StateVector random_state(Eigen::Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d;
  StateVector s;
  s.amplitudes.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.amplitudes[i] = Complex(d(gen), d(gen));
  s.amplitudes.normalize();
  return s;
}

IntegratorConfig with_dt(double dt) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  return cfg;
}

}  // namespace

TEST(Evolve, HermitianNormConserved) {
  struct Case {
    ChainSpec spec;
    QuenchProtocol p;
    InitialState init;
  };
  const Case cases[] = {
      {{Model::SSH, 40, Boundary::OPEN_EVEN, 0.0}, {ProtocolKind::LINEAR, 0.01}, kEdge},
      {{Model::SSH, 40, Boundary::PERIODIC, 0.0}, {ProtocolKind::SINUSOIDAL, 0.02}, {InitialKind::SSH_BULK, 20}},
      {{Model::SSH, 31, Boundary::OPEN_ODD, 0.0}, {ProtocolKind::PERIODIC, 0.02}, kEdge},
      {{Model::CREUTZ, 30, Boundary::OPEN_EVEN, 0.0}, {ProtocolKind::CREUTZ_MK, 0.02}, {InitialKind::CREUTZ_PLAQUETTE, 15}},
      {{Model::CREUTZ, 30, Boundary::OPEN_EVEN, 0.0}, {ProtocolKind::CREUTZ_THETA, 0.05}, {InitialKind::CREUTZ_LEFT_EDGE, 0}},
  };
  for (const auto& c : cases) {
    const Evolution ev = evolve(c.spec, c.p, initial_state(c.spec, c.init), with_dt(0.01));
    EXPECT_LE(std::abs(std::exp(ev.state.log_norm()) - 1.0), 1e-8) << to_string(c.p.kind);
    EXPECT_LE(std::abs(ev.state.log_scale), 1e-6) << to_string(c.p.kind);
    EXPECT_DOUBLE_EQ(ev.state.time, t_end(c.p));
  }
}

TEST(Evolve, NormConservedWithAutoStep) {
  const ChainSpec spec{Model::SSH, 30, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.02};
  const StateVector init = initial_state(spec, kEdge);
  const double dt = select_dt(spec, p, init, 1e-8);
  EXPECT_GT(dt, 0.0);
  EXPECT_LE(dt, default_dt(0.0));
  const StateVector s = evolve(spec, p, init, with_dt(dt)).state;
  EXPECT_LE(std::abs(std::exp(s.log_norm()) - 1.0), 1e-8);
}

TEST(Evolve, FastQuenchLeavesStateUnchanged) {
  const ChainSpec spec{Model::SSH, 20, Boundary::OPEN_EVEN, 0.0};
  const StateVector init = initial_state(spec, kEdge);
  const StateVector s = evolve(spec, {ProtocolKind::LINEAR, 1e5}, init, with_dt(0.01)).state;
  EXPECT_LE((true_state(s) - init.amplitudes).norm(), 1e-4);
}

TEST(Evolve, AgreesWithMagnusOracle) {
  const ChainSpec spec{Model::SSH, 4, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.05};
  const StateVector init = initial_state(spec, kEdge);
  const StateVector s = evolve(spec, p, init, with_dt(0.01)).state;
  const ComplexVector ref =
      oracle::magnus4(spec, [&](double t) { return schedule_at(p, t); }, 0.0, t_end(p), init.amplitudes, 2000);
  EXPECT_LE((true_state(s) - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Evolve, CreutzAgreesWithMagnusOracle) {
  const ChainSpec spec{Model::CREUTZ, 4, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::CREUTZ_THETA, 0.2};
  const StateVector init = initial_state(spec, {InitialKind::CREUTZ_PLAQUETTE, 2});
  // bandwidth 4 on the ladder: halve the step
  const StateVector s = evolve(spec, p, init, with_dt(0.005)).state;
  const ComplexVector ref =
      oracle::magnus4(spec, [&](double t) { return schedule_at(p, t); }, 0.0, t_end(p), init.amplitudes, 2000);
  EXPECT_LE((true_state(s) - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Evolve, FourthOrderConvergence) {
  const ChainSpec spec{Model::SSH, 8, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.05};
  const StateVector init = initial_state(spec, kEdge);
  const double ratio = convergence_check(spec, p, init, 0.1) / convergence_check(spec, p, init, 0.05);
  EXPECT_NEAR(ratio / 16.0, 1.0, 0.3);
}

TEST(Evolve, StepValidation) {
  const ChainSpec spec{Model::SSH, 4, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.1};
  const StateVector init = initial_state(spec, kEdge);
  EXPECT_THROW((void)evolve(spec, p, init, with_dt(0.0)), ConfigError);
  EXPECT_THROW((void)evolve(spec, p, init, with_dt(-0.01)), ConfigError);
  EXPECT_THROW((void)evolve(spec, p, init, with_dt(0.2)), ConfigError);
  EXPECT_THROW((void)convergence_check(spec, p, init, 0.0), ConfigError);
  StateVector bad = init;
  bad.amplitudes *= 2.0;
  EXPECT_THROW((void)evolve(spec, p, bad, with_dt(0.01)), ConfigError);
}

TEST(Evolve, DefaultStep) {
  EXPECT_DOUBLE_EQ(default_dt(0.0), 0.01);
  EXPECT_DOUBLE_EQ(default_dt(0.1), 0.01);
  EXPECT_DOUBLE_EQ(default_dt(0.5), 0.002);
}

TEST(Evolve, NonHermitianGrowthStaysInLogDomain) {
  const double gamma = 0.1;
  const double beta = 1e-3;
  const ChainSpec spec{Model::NH_SSH, 200, Boundary::OPEN_EVEN, gamma};
  const Evolution ev = evolve(spec, {ProtocolKind::NH_LINEAR, beta}, initial_state(spec, kEdge), with_dt(default_dt(gamma)));
  ASSERT_TRUE(ev.state.amplitudes.allFinite());
  const double n = ev.state.amplitudes.norm();
  EXPECT_GE(n, 0.5);
  EXPECT_LE(n, 2.0);
  // amplitude norm grows like exp(gamma/beta / 2) plus the exceptional-point excess
  EXPECT_GE(ev.state.log_scale, 0.45 * gamma / beta);
  EXPECT_LE(ev.state.log_scale, 0.65 * gamma / beta);
}

TEST(Evolve, NonHermitianConvergenceCheckRuns) {
  const double gamma = 0.1;
  const ChainSpec spec{Model::NH_SSH, 60, Boundary::OPEN_EVEN, gamma};
  const double err = convergence_check(spec, {ProtocolKind::NH_LINEAR, 1e-2}, initial_state(spec, kEdge), 0.02);
  EXPECT_TRUE(std::isfinite(err));
  EXPECT_LT(err, 1e-4);
}

TEST(Evolve, StoredNormStaysNearUnity) {
  const ChainSpec spec{Model::NH_SSH, 60, Boundary::OPEN_EVEN, 0.2};
  IntegratorConfig cfg = with_dt(0.01);
  for (int i = 1; i <= 20; ++i) cfg.snapshot_times.push_back(5.0 * i);
  const Evolution ev = evolve(spec, {ProtocolKind::NH_LINEAR, 1e-2}, initial_state(spec, kEdge), cfg);
  for (const auto& s : ev.snapshots) {
    EXPECT_GE(s.amplitudes.norm(), 0.5);
    EXPECT_LE(s.amplitudes.norm(), 2.0);
  }
  EXPECT_GT(ev.state.log_scale, 0.0);
}

TEST(Evolve, Linearity) {
  const ChainSpec spec{Model::SSH, 8, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.05};
  const StateVector a = random_state(16, 11);
  const StateVector b = random_state(16, 12);
  const Complex ca(0.6, -0.2);
  const Complex cb(-0.3, 0.5);
  StateVector mix;
  mix.amplitudes = ca * a.amplitudes + cb * b.amplitudes;
  const double len = mix.amplitudes.norm();
  mix.amplitudes /= len;
  const auto run = [&](const StateVector& s) { return true_state(evolve(spec, p, s, with_dt(0.01)).state); };
  const ComplexVector lhs = run(mix) * len;
  const ComplexVector rhs = ca * run(a) + cb * run(b);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Evolve, TimeReversal) {
  const ChainSpec spec{Model::SSH, 10, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.02};
  const auto sched = [&](double t) { return schedule_at(p, t); };
  const StateVector init = random_state(20, 5);
  const Evolution fwd = propagate(spec, sched, 0.0, t_end(p), init, with_dt(0.01));
  const Evolution back = propagate(spec, sched, t_end(p), 0.0, fwd.state, with_dt(0.01));
  EXPECT_LE((true_state(back.state) - init.amplitudes).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_DOUBLE_EQ(back.state.time, 0.0);
}

TEST(Evolve, ChiralSymmetryOfEdgeProfile) {
  const ChainSpec spec{Model::SSH, 60, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.01};
  const StateVector s = evolve(spec, p, initial_state(spec, kEdge), with_dt(0.01)).state;
  const DimerProfile prof = dimer_profile(s, spec, p, 1);
  for (int n = 1; n <= prof.size(); ++n) EXPECT_NEAR(prof.plus(n), prof.minus(n), 1e-6) << n;
}

TEST(Evolve, ActiveWindowMatchesFullUpdate) {
  const ChainSpec spec{Model::SSH, 120, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.01};
  const StateVector init = initial_state(spec, kEdge);
  IntegratorConfig full = with_dt(0.02);
  full.window_threshold = 0.0;
  const StateVector a = evolve(spec, p, init, with_dt(0.02)).state;
  const StateVector b = evolve(spec, p, init, full).state;
  EXPECT_LE((true_state(a) - true_state(b)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolve, SnapshotsAtNearestStep) {
  const ChainSpec spec{Model::SSH, 6, Boundary::OPEN_EVEN, 0.0};
  const QuenchProtocol p{ProtocolKind::LINEAR, 0.1};
  IntegratorConfig cfg = with_dt(0.01);
  cfg.snapshot_times = {5.004, 0.0, 10.0};
  const StateVector init = initial_state(spec, kEdge);
  const Evolution ev = evolve(spec, p, init, cfg);
  ASSERT_EQ(ev.snapshots.size(), 3u);
  EXPECT_NEAR(ev.snapshots[0].time, 5.0, 1e-12);
  EXPECT_EQ(ev.snapshots[1].amplitudes, init.amplitudes);
  EXPECT_EQ(ev.snapshots[2].amplitudes, ev.state.amplitudes);
  cfg.snapshot_times = {10.5};
  EXPECT_THROW((void)evolve(spec, p, init, cfg), ConfigError);
}
