#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "qtransport/core.hpp"
#include "qtransport/models.hpp"
#include "qtransport/protocols.hpp"
#include "qtransport/state.hpp"

namespace qtransport {

struct IntegratorConfig {
  double dt = 0.01;
  std::vector<double> snapshot_times;
  // Target relative error used by select_dt.
  double tolerance = 1e-8;
  // Cells whose probability stays below this are not updated until the state
  // reaches them (open chains only). 0 updates the full chain every step.
  double window_threshold = 1e-30;
};

struct Evolution {
  StateVector state;
  std::vector<StateVector> snapshots;  // same order as IntegratorConfig::snapshot_times
  long steps = 0;
  double step = 0.0;  // uniform step actually used, |t1 - t0| / steps
};

/// Default step: min(0.01, 0.01 / max(1, 10 gamma)).
[[nodiscard]] inline double default_dt(double gamma) { return std::min(0.01, 0.01 / std::max(1.0, gamma * 10.0)); }

inline void validate(const IntegratorConfig& cfg) {
  require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "dt must be positive");
  require(cfg.dt <= 0.1, "dt must not exceed 0.1");
}

/// Classical RK4 for i d(psi)/dt = H(t) psi from t0 to t1 (t1 < t0 integrates backwards).
/// The window is split into ceil(|t1-t0|/dt) equal steps. Whenever the stored norm
/// leaves [0.5, 2] it is moved into log_scale.
///
/// On open chains only a window of cells around the support of the state is
/// updated; the window grows by kWindowMargin cells whenever the band next to
/// its edge carries probability above cfg.window_threshold.
inline constexpr Eigen::Index kWindowMargin = 8;

template <class ScheduleFn>
[[nodiscard]] Evolution propagate(const ChainSpec& spec, ScheduleFn&& schedule, double t0, double t1,
                                  const StateVector& initial, const IntegratorConfig& cfg) {
  validate(spec);
  validate(cfg);
  const Eigen::Index sites = site_count(spec);
  require(initial.size() == sites, "initial state length does not match the chain");
  const double n0 = initial.amplitudes.norm();
  require(std::abs(n0 - 1.0) <= 1e-6, "initial amplitudes must be normalized");

  const double span = t1 - t0;
  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / cfg.dt - 1e-9)));
  const double h = span / static_cast<double>(steps);

  const double lo = std::min(t0, t1);
  const double hi = std::max(t0, t1);
  std::vector<std::pair<long, std::size_t>> snap_steps;
  for (std::size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
    const double ts = cfg.snapshot_times[i];
    require(ts >= lo - 1e-12 * std::max(1.0, hi) && ts <= hi * (1.0 + 1e-12) + 1e-12,
            "snapshot time outside the evolution window");
    const long k = std::clamp(static_cast<long>(std::llround((ts - t0) / h)), 0L, steps);
    snap_steps.emplace_back(k, i);
  }
  std::sort(snap_steps.begin(), snap_steps.end());

  Evolution out;
  out.steps = steps;
  out.step = std::abs(h);
  out.snapshots.resize(cfg.snapshot_times.size());
  StateVector psi = initial;
  psi.time = t0;

  std::size_t next_snap = 0;
  auto take_snapshots = [&](long k) {
    while (next_snap < snap_steps.size() && snap_steps[next_snap].first == k) {
      out.snapshots[snap_steps[next_snap].second] = psi;
      ++next_snap;
    }
  };
  take_snapshots(0);

  const Eigen::Index cells = spec.unit_cells;
  Eigen::Index wlo = 0;
  Eigen::Index whi = cells;
  const bool windowed = cfg.window_threshold > 0.0 && spec.boundary != Boundary::PERIODIC;
  if (windowed) {
    Eigen::Index first = sites;
    Eigen::Index last = -1;
    for (Eigen::Index i = 0; i < sites; ++i) {
      if (initial.amplitudes[i] != Complex{}) {
        first = std::min(first, i);
        last = i;
      }
    }
    if (last < 0) throw ConfigError("initial state is zero");
    wlo = std::max<Eigen::Index>(0, first / 2 - kWindowMargin);
    whi = std::min<Eigen::Index>(cells, last / 2 + 1 + kWindowMargin);
  }
  auto band_weight = [&](Eigen::Index c_lo, Eigen::Index c_hi) {
    double w = 0.0;
    for (Eigen::Index i = 2 * std::max<Eigen::Index>(c_lo, 0); i < std::min(2 * c_hi, sites); ++i) w = std::max(w, std::norm(psi.amplitudes[i]));
    return w;
  };

  ComplexVector acc_store = ComplexVector::Zero(sites);
  ComplexVector x1_store = ComplexVector::Zero(sites);
  ComplexVector x2_store = ComplexVector::Zero(sites);
  using detail::Cx;
  auto* acc = reinterpret_cast<Cx*>(acc_store.data());
  auto* x1 = reinterpret_cast<Cx*>(x1_store.data());
  auto* x2 = reinterpret_cast<Cx*>(x2_store.data());
  // -i * s * u for real s.
  auto rot = [](double s, Cx u) { return Cx{s * u.im, -s * u.re}; };
  const double half = 0.5 * h;
  const double sixth = h / 6.0;
  for (long k = 1; k <= steps; ++k) {
    const double t = t0 + h * static_cast<double>(k - 1);
    const CouplingSet h_start = schedule(t);
    const CouplingSet h_mid = schedule(t + half);
    const CouplingSet h_end = schedule(k == steps ? t1 : t + h);
    auto* y = reinterpret_cast<Cx*>(psi.amplitudes.data());

    detail::for_each_row_value(spec, h_start, psi.amplitudes.data(), wlo, whi, [&](Eigen::Index i, Cx u) {
      acc[i] = u;
      x1[i] = detail::add(y[i], rot(half, u));
    });
    detail::for_each_row_value(spec, h_mid, x1_store.data(), wlo, whi, [&](Eigen::Index i, Cx u) {
      acc[i] = {acc[i].re + 2.0 * u.re, acc[i].im + 2.0 * u.im};
      x2[i] = detail::add(y[i], rot(half, u));
    });
    detail::for_each_row_value(spec, h_mid, x2_store.data(), wlo, whi, [&](Eigen::Index i, Cx u) {
      acc[i] = {acc[i].re + 2.0 * u.re, acc[i].im + 2.0 * u.im};
      x1[i] = detail::add(y[i], rot(h, u));
    });
    double norm2 = 0.0;
    detail::for_each_row_value(spec, h_end, x1_store.data(), wlo, whi, [&](Eigen::Index i, Cx u) {
      const Cx total{acc[i].re + u.re, acc[i].im + u.im};
      y[i] = detail::add(y[i], rot(sixth, total));
      norm2 += y[i].re * y[i].re + y[i].im * y[i].im;
    });
    psi.time = k == steps ? t1 : t + h;

    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm)) {
      throw NumericalError("non-finite amplitudes at t = " + std::to_string(psi.time) + "; reduce dt");
    }
    if (norm < 0.5 || norm > 2.0) {
      if (norm == 0.0) throw NumericalError("state vanished during evolution");
      psi.amplitudes /= norm;
      psi.log_scale += std::log(norm);
      norm2 = 1.0;
    }
    if (windowed) {
      const double limit = cfg.window_threshold * norm2;
      if (wlo > 0 && band_weight(wlo, wlo + kWindowMargin) > limit) wlo = std::max<Eigen::Index>(0, wlo - kWindowMargin);
      if (whi < cells && band_weight(whi - kWindowMargin, whi) > limit) {
        whi = std::min<Eigen::Index>(cells, whi + kWindowMargin);
      }
    }
    take_snapshots(k);
  }
  out.state = std::move(psi);
  return out;
}

/// Evolves `initial` over the full window [0, t_end(protocol)].
[[nodiscard]] inline Evolution evolve(const ChainSpec& spec, const QuenchProtocol& protocol,
                                      const StateVector& initial, const IntegratorConfig& cfg) {
  validate(spec, protocol);
  return propagate(spec, [&](double t) { return schedule_at(protocol, t); }, 0.0, t_end(protocol), initial, cfg);
}

/// Largest amplitude difference between runs at dt and dt/2, relative to the true norm of the finer run.
[[nodiscard]] inline double convergence_check(const ChainSpec& spec, const QuenchProtocol& protocol,
                                              const StateVector& initial, double dt) {
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  IntegratorConfig coarse;
  coarse.dt = dt;
  IntegratorConfig fine;
  fine.dt = dt / 2.0;
  const StateVector a = evolve(spec, protocol, initial, coarse).state;
  const StateVector b = evolve(spec, protocol, initial, fine).state;
  const double ref = b.log_norm();
  const ComplexVector diff =
      a.amplitudes * std::exp(a.log_scale - ref) - b.amplitudes * std::exp(b.log_scale - ref);
  return diff.cwiseAbs().maxCoeff();
}

/// Halves dt from default_dt until convergence_check meets the tolerance (floor 1e-4).
[[nodiscard]] inline double select_dt(const ChainSpec& spec, const QuenchProtocol& protocol,
                                      const StateVector& initial, double tolerance) {
  double dt = default_dt(spec.gamma);
  while (dt > 1e-4 && convergence_check(spec, protocol, initial, dt) > tolerance) dt /= 2.0;
  return dt;
}

}  // namespace qtransport
