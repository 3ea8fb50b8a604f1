#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qtransport/core.hpp"
#include "qtransport/models.hpp"
#include "qtransport/protocols.hpp"
#include "qtransport/state.hpp"

namespace qtransport {

/// Final-state probabilities on the dimers |n,+/-> of cell n = 1..size().
struct DimerProfile {
  std::vector<double> p_plus;
  std::vector<double> p_minus;
  int offset = 0;            // distances are measured as |n - offset|
  double rescale_log = 0.0;  // log of the global factor applied to every probability

  [[nodiscard]] int size() const { return static_cast<int>(p_plus.size()); }
  [[nodiscard]] double plus(int cell) const { return p_plus.at(static_cast<std::size_t>(cell - 1)); }
  [[nodiscard]] double minus(int cell) const { return p_minus.at(static_cast<std::size_t>(cell - 1)); }
  [[nodiscard]] double total_plus() const { return std::accumulate(p_plus.begin(), p_plus.end(), 0.0); }
  [[nodiscard]] double total_minus() const { return std::accumulate(p_minus.begin(), p_minus.end(), 0.0); }
};

struct TransportSummary {
  double distance = 0.0;
  double width = 0.0;
  double peak = 0.0;
  int peak_cell = 0;
};

/// True when the protocol ends on a Hamiltonian whose eigenstates are (or are
/// read out on) the intracell dimers.
[[nodiscard]] inline bool ends_on_intracell_dimers(ProtocolKind k) {
  return k != ProtocolKind::PERIODIC && k != ProtocolKind::CREUTZ_THETA;
}

/// Projects onto |n,+/-> = (|n,A> + c_{+/-}|n,B>)/sqrt 2.
///
/// SSH and the Creutz M-K quench use c = +/-1. NH_SSH uses
/// c = +/-sqrt(1 - gamma^2) - i gamma and multiplies every probability by
/// exp(-gamma/beta), recorded in rescale_log. The odd chain's unpaired (N,A)
/// site is not a dimer and is left out, giving N-1 cells.
[[nodiscard]] inline DimerProfile dimer_profile(const StateVector& state, const ChainSpec& spec,
                                                const QuenchProtocol& protocol, int offset = 0) {
  validate(spec, protocol);
  require(state.size() == site_count(spec), "state length does not match the chain");
  require(ends_on_intracell_dimers(protocol.kind),
          std::string(to_string(protocol.kind)) + " does not end on a dimerized Hamiltonian");
  Complex c_plus{1.0, 0.0};
  Complex c_minus{-1.0, 0.0};
  DimerProfile out;
  out.offset = offset;
  if (spec.model == Model::NH_SSH) {
    require(spec.gamma < 1.0, "NH dimer basis needs gamma < 1");
    const double s = std::sqrt(1.0 - spec.gamma * spec.gamma);
    c_plus = {s, -spec.gamma};
    c_minus = {-s, -spec.gamma};
    out.rescale_log = -spec.gamma / protocol.beta;
  }
  const int cells = spec.boundary == Boundary::OPEN_ODD ? spec.unit_cells - 1 : spec.unit_cells;
  out.p_plus.resize(static_cast<std::size_t>(cells));
  out.p_minus.resize(static_cast<std::size_t>(cells));
  const double weight = std::exp(2.0 * state.log_scale + out.rescale_log) / 2.0;
  for (int n = 1; n <= cells; ++n) {
    const Complex a = state.amplitudes[SiteIndex{n, Sublattice::A}.linear()];
    const Complex b = state.amplitudes[SiteIndex{n, Sublattice::B}.linear()];
    out.p_plus[static_cast<std::size_t>(n - 1)] = std::norm(a + std::conj(c_plus) * b) * weight;
    out.p_minus[static_cast<std::size_t>(n - 1)] = std::norm(a + std::conj(c_minus) * b) * weight;
  }
  return out;
}

/// |<n,A>|^2 + |<n,B>|^2 per cell.
[[nodiscard]] inline std::vector<double> cell_occupancy(const StateVector& state) {
  const double weight = std::exp(2.0 * state.log_scale);
  std::vector<double> out(static_cast<std::size_t>((state.size() + 1) / 2), 0.0);
  for (Eigen::Index s = 0; s < state.size(); ++s) out[static_cast<std::size_t>(s / 2)] += std::norm(state.amplitudes[s]) * weight;
  return out;
}

/// Peak cell (smallest n on ties), distance |n_max - offset|, and the standard
/// deviation of p_plus, normalized to unit weight, about n_max.
[[nodiscard]] inline TransportSummary transport_summary(const DimerProfile& profile) {
  require(profile.size() > 0, "empty profile");
  const double total = profile.total_plus();
  if (!(total > 0.0)) throw ConfigError("profile has no weight");
  const auto it = std::max_element(profile.p_plus.begin(), profile.p_plus.end());
  TransportSummary s;
  s.peak_cell = static_cast<int>(it - profile.p_plus.begin()) + 1;
  s.peak = *it;
  s.distance = std::abs(s.peak_cell - profile.offset);
  double var = 0.0;
  for (int n = 1; n <= profile.size(); ++n) {
    const double dn = n - s.peak_cell;
    var += dn * dn * profile.plus(n);
  }
  s.width = std::sqrt(var / total);
  return s;
}

/// |<1,A|psi>|^2, the weight left on the first site.
[[nodiscard]] inline double return_probability(const StateVector& state) { return state.probability(0); }

/// |<N,A|psi>|^2 on the odd chain, the adiabatic transfer target of |1,A>.
[[nodiscard]] inline double adiabatic_fidelity(const StateVector& state, const ChainSpec& spec) {
  require(spec.model == Model::SSH && spec.boundary == Boundary::OPEN_ODD, "fidelity is defined on the odd SSH chain");
  require(state.size() == site_count(spec), "state length does not match the chain");
  return state.probability(SiteIndex{spec.unit_cells, Sublattice::A}.linear());
}

struct ScaledCurve {
  std::vector<double> x;
  std::vector<double> y;
};

/// (n - offset) beta^{nu_d}, p_plus beta^{-nu_p}.
[[nodiscard]] inline ScaledCurve collapse_rescale(const DimerProfile& profile, double beta, double nu_d = 0.61,
                                                  double nu_p = 0.61) {
  require(beta > 0.0, "beta must be positive");
  ScaledCurve c;
  const double sx = std::pow(beta, nu_d);
  const double sy = std::pow(beta, -nu_p);
  for (int n = 1; n <= profile.size(); ++n) {
    c.x.push_back((n - profile.offset) * sx);
    c.y.push_back(profile.plus(n) * sy);
  }
  return c;
}

namespace detail {

inline double interpolate(const ScaledCurve& c, double x) {
  if (x <= c.x.front()) return x == c.x.front() ? c.y.front() : 0.0;
  if (x >= c.x.back()) return x == c.x.back() ? c.y.back() : 0.0;
  const auto it = std::upper_bound(c.x.begin(), c.x.end(), x);
  const auto i = static_cast<std::size_t>(it - c.x.begin());
  const double f = (x - c.x[i - 1]) / (c.x[i] - c.x[i - 1]);
  return c.y[i - 1] + f * (c.y[i] - c.y[i - 1]);
}

}  // namespace detail

/// Integral of |f - g| over the union of both supports, divided by the mean of
/// the two integrals. Curves are linearly interpolated and zero outside their range.
[[nodiscard]] inline double normalized_l1_distance(const ScaledCurve& f, const ScaledCurve& g,
                                                   std::size_t samples = 20000) {
  require(f.x.size() >= 2 && g.x.size() >= 2, "curves need at least two points");
  const double lo = std::min(f.x.front(), g.x.front());
  const double hi = std::max(f.x.back(), g.x.back());
  const double dx = (hi - lo) / static_cast<double>(samples);
  double diff = 0.0;
  double area_f = 0.0;
  double area_g = 0.0;
  for (std::size_t i = 0; i <= samples; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double w = (i == 0 || i == samples) ? 0.5 : 1.0;
    const double a = detail::interpolate(f, x);
    const double b = detail::interpolate(g, x);
    diff += w * std::abs(a - b);
    area_f += w * std::abs(a);
    area_g += w * std::abs(b);
  }
  const double mean = 0.5 * (area_f + area_g);
  if (!(mean > 0.0)) throw ConfigError("curves carry no weight");
  return diff / mean;
}

/// Sum |f_n - g_n| / sum g_n for two profiles on the same cells (g is the reference).
[[nodiscard]] inline double normalized_l1_distance(const std::vector<double>& f, const std::vector<double>& g) {
  require(f.size() == g.size(), "profiles differ in length");
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    diff += std::abs(f[i] - g[i]);
    ref += std::abs(g[i]);
  }
  if (!(ref > 0.0)) throw ConfigError("reference profile carries no weight");
  return diff / ref;
}

}  // namespace qtransport
