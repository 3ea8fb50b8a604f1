#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

#include "qtransport/core.hpp"
#include "qtransport/evolve.hpp"
#include "qtransport/models.hpp"
#include "qtransport/observables.hpp"
#include "qtransport/protocols.hpp"

namespace qtransport {

enum Observable : unsigned {
  kTransport = 1u << 0,
  kReturnProbability = 1u << 1,
  kFidelity = 1u << 2,
};

struct SweepOptions {
  InitialState initial{InitialKind::SSH_LEFT_EDGE, 0};
  // dt <= 0 selects default_dt(gamma).
  double dt = 0.0;
  double window_threshold = 1e-30;
  unsigned observables = kTransport;
  // 0 uses the available hardware parallelism.
  int workers = 0;
  double sudden_j1 = 0.5;
  double sudden_j2 = 0.5;
};

/// One row per beta. Quantities not selected, or undefined for the protocol, are NaN.
struct SweepRow {
  double beta = 0.0;
  double distance = std::numeric_limits<double>::quiet_NaN();
  double width = std::numeric_limits<double>::quiet_NaN();
  double peak = std::numeric_limits<double>::quiet_NaN();
  int peak_cell = 0;
  double return_probability = std::numeric_limits<double>::quiet_NaN();
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double log_scale = 0.0;
  long steps = 0;
};

/// `count` log-spaced values from lo to hi inclusive.
[[nodiscard]] inline std::vector<double> log_spaced(double lo, double hi, int count) {
  require(lo > 0.0 && hi > lo, "log_spaced needs 0 < lo < hi");
  require(count >= 2, "log_spaced needs at least two points");
  std::vector<double> out;
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out.push_back(std::exp(a + (b - a) * i / (count - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

/// Offset that re-origins profiles at the initial cell (cell 1 for edge states).
[[nodiscard]] inline int profile_offset(const InitialState& init) {
  return init.kind == InitialKind::SSH_BULK || init.kind == InitialKind::CREUTZ_PLAQUETTE ? init.cell : 1;
}

[[nodiscard]] inline SweepRow run_point(const ChainSpec& spec, ProtocolKind kind, double beta,
                                        const SweepOptions& opt) {
  QuenchProtocol protocol{kind, beta, opt.sudden_j1, opt.sudden_j2};
  validate(spec, protocol);
  IntegratorConfig cfg;
  cfg.dt = opt.dt > 0.0 ? opt.dt : default_dt(spec.gamma);
  cfg.window_threshold = opt.window_threshold;
  const Evolution ev = evolve(spec, protocol, initial_state(spec, opt.initial), cfg);
  SweepRow row;
  row.beta = beta;
  row.log_scale = ev.state.log_scale;
  row.steps = ev.steps;
  if ((opt.observables & kTransport) && ends_on_intracell_dimers(kind)) {
    const TransportSummary s = transport_summary(dimer_profile(ev.state, spec, protocol, profile_offset(opt.initial)));
    row.distance = s.distance;
    row.width = s.width;
    row.peak = s.peak;
    row.peak_cell = s.peak_cell;
  }
  if (opt.observables & kReturnProbability) row.return_probability = return_probability(ev.state);
  if ((opt.observables & kFidelity) && spec.boundary == Boundary::OPEN_ODD)
    row.fidelity = adiabatic_fidelity(ev.state, spec);
  return row;
}

/// Runs every beta on a pool of worker threads. Rows come back in input order and
/// do not depend on the worker count.
[[nodiscard]] inline std::vector<SweepRow> sweep(const ChainSpec& spec, ProtocolKind kind,
                                                 const std::vector<double>& betas, const SweepOptions& opt) {
  validate(spec);
  for (std::size_t i = 0; i < betas.size(); ++i) {
    require(std::isfinite(betas[i]) && betas[i] > 0.0, "beta values must be positive");
    require(i == 0 || betas[i] > betas[i - 1], "beta list must be sorted ascending");
  }
  std::vector<SweepRow> rows(betas.size());
  if (betas.empty()) return rows;
  int workers = opt.workers > 0 ? opt.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(betas.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < betas.size(); i = next++) {
      try {
        rows[i] = run_point(spec, kind, betas[i], opt);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = betas.size();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

}  // namespace qtransport
