#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "qtransport/sweep.hpp"

using namespace qtransport;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void expect_identical(const SweepRow& a, const SweepRow& b) {
  EXPECT_TRUE(same_bits(a.beta, b.beta));
  EXPECT_TRUE(same_bits(a.distance, b.distance));
  EXPECT_TRUE(same_bits(a.width, b.width));
  EXPECT_TRUE(same_bits(a.peak, b.peak));
  EXPECT_EQ(a.peak_cell, b.peak_cell);
  EXPECT_TRUE(same_bits(a.return_probability, b.return_probability));
  EXPECT_TRUE(same_bits(a.fidelity, b.fidelity));
  EXPECT_TRUE(same_bits(a.log_scale, b.log_scale));
  EXPECT_EQ(a.steps, b.steps);
}

const ChainSpec kSmall{Model::SSH, 40, Boundary::OPEN_EVEN, 0.0};

SweepOptions fast_options(int workers) {
  SweepOptions opt;
  opt.dt = 0.04;
  opt.workers = workers;
  opt.observables = kTransport | kReturnProbability | kFidelity;
  return opt;
}

}  // namespace

TEST(LogSpaced, EndpointsAndRatios) {
  const auto v = log_spaced(1e-4, 1e-2, 5);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.front(), 1e-4);
  EXPECT_EQ(v.back(), 1e-2);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_NEAR(v[i] / v[i - 1], std::sqrt(10.0), 1e-12);
  EXPECT_THROW((void)log_spaced(1e-2, 1e-4, 5), ConfigError);
  EXPECT_THROW((void)log_spaced(0.0, 1e-4, 5), ConfigError);
  EXPECT_THROW((void)log_spaced(1e-4, 1e-2, 1), ConfigError);
}

TEST(ProfileOffset, EdgeAndBulk) {
  EXPECT_EQ(profile_offset({InitialKind::SSH_LEFT_EDGE, 0}), 1);
  EXPECT_EQ(profile_offset({InitialKind::SSH_BULK, 300}), 300);
  EXPECT_EQ(profile_offset({InitialKind::CREUTZ_PLAQUETTE, 12}), 12);
  EXPECT_EQ(profile_offset({InitialKind::CREUTZ_LEFT_EDGE, 0}), 1);
}

TEST(Sweep, EmptyList) {
  EXPECT_TRUE(sweep(kSmall, ProtocolKind::LINEAR, {}, fast_options(1)).empty());
}

TEST(Sweep, DeterministicAcrossWorkerCounts) {
  const std::vector<double> betas{0.02, 0.03, 0.05, 0.08, 0.1};
  const auto serial = sweep(kSmall, ProtocolKind::LINEAR, betas, fast_options(1));
  const auto parallel = sweep(kSmall, ProtocolKind::LINEAR, betas, fast_options(3));
  ASSERT_EQ(serial.size(), betas.size());
  ASSERT_EQ(parallel.size(), betas.size());
  for (std::size_t i = 0; i < betas.size(); ++i) {
    EXPECT_EQ(serial[i].beta, betas[i]);
    expect_identical(serial[i], parallel[i]);
  }
}

TEST(Sweep, MatchesRunPoint) {
  const std::vector<double> betas{0.03, 0.06};
  const auto rows = sweep(kSmall, ProtocolKind::LINEAR, betas, fast_options(2));
  for (std::size_t i = 0; i < betas.size(); ++i)
    expect_identical(rows[i], run_point(kSmall, ProtocolKind::LINEAR, betas[i], fast_options(1)));
}

TEST(Sweep, RejectsUnsortedOrInvalidBetas) {
  EXPECT_THROW((void)sweep(kSmall, ProtocolKind::LINEAR, {0.05, 0.02}, fast_options(1)), ConfigError);
  EXPECT_THROW((void)sweep(kSmall, ProtocolKind::LINEAR, {0.05, 0.05}, fast_options(1)), ConfigError);
  EXPECT_THROW((void)sweep(kSmall, ProtocolKind::LINEAR, {-0.01}, fast_options(1)), ConfigError);
  EXPECT_THROW((void)sweep(kSmall, ProtocolKind::LINEAR, {NAN}, fast_options(1)), ConfigError);
  EXPECT_THROW((void)sweep({Model::SSH, 1, Boundary::OPEN_EVEN, 0.0}, ProtocolKind::LINEAR, {0.1}, fast_options(1)),
               ConfigError);
}

TEST(Sweep, PropagatesPointFailures) {
  // A Creutz protocol on an SSH chain fails inside the worker.
  EXPECT_THROW((void)sweep(kSmall, ProtocolKind::CREUTZ_THETA, {0.05, 0.1}, fast_options(2)), ConfigError);
}

TEST(RunPoint, FieldsForEdgeTransport) {
  const SweepRow row = run_point(kSmall, ProtocolKind::LINEAR, 0.05, fast_options(1));
  EXPECT_EQ(row.beta, 0.05);
  EXPECT_TRUE(std::isfinite(row.distance));
  EXPECT_GE(row.distance, 0.0);
  EXPECT_GT(row.width, 0.0);
  EXPECT_GT(row.peak, 0.0);
  EXPECT_GE(row.peak_cell, 1);
  EXPECT_GE(row.return_probability, 0.0);
  EXPECT_LE(row.return_probability, 1.0);
  EXPECT_TRUE(std::isnan(row.fidelity));  // not an odd chain
  EXPECT_EQ(row.steps, static_cast<long>(std::lround(1.0 / 0.05 / 0.04)));
}

TEST(RunPoint, PeriodicHasNoTransport) {
  const SweepRow row = run_point(kSmall, ProtocolKind::PERIODIC, 0.05, fast_options(1));
  EXPECT_TRUE(std::isnan(row.distance));
  EXPECT_TRUE(std::isnan(row.width));
  EXPECT_TRUE(std::isfinite(row.return_probability));
}

TEST(RunPoint, OddChainFidelity) {
  const ChainSpec odd{Model::SSH, 11, Boundary::OPEN_ODD, 0.0};
  const SweepRow row = run_point(odd, ProtocolKind::LINEAR, 1e-3, fast_options(1));
  EXPECT_GT(row.fidelity, 0.9);
  EXPECT_LE(row.fidelity, 1.0 + 1e-9);
}

TEST(RunPoint, ObservableMask) {
  SweepOptions opt = fast_options(1);
  opt.observables = kReturnProbability;
  const SweepRow row = run_point(kSmall, ProtocolKind::LINEAR, 0.05, opt);
  EXPECT_TRUE(std::isnan(row.distance));
  EXPECT_TRUE(std::isfinite(row.return_probability));
  EXPECT_TRUE(std::isnan(row.fidelity));
}
