#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qtransport/core.hpp"
#include "qtransport/models.hpp"
#include "qtransport/protocols.hpp"
#include "qtransport/state.hpp"

namespace qtransport {

/// One eigenmode of the open chain with 2N-1 sites (N A-sites, N-1 B-sites).
struct ExtendedMode {
  int j = 0;           // 1 .. 2N-1; j == N is the zero-energy edge mode
  double k = 0.0;      // pi j / N
  double energy = 0.0;
  double phase = 0.0;  // arg(J1 + J2 e^{-ik})
  double gap = 0.0;    // |cos(k/2)|, the gap to the edge mode at J1 = J2 = 1/2
};

struct ExtendedModeTable {
  int unit_cells = 0;
  double j1 = 0.0;
  double j2 = 0.0;
  // false when J1 and J2 have opposite signs; energies then come from dense diagonalization.
  bool analytic = true;
  std::vector<ExtendedMode> modes;  // index j-1, ascending energy

  [[nodiscard]] const ExtendedMode& mode(int j) const { return modes.at(static_cast<std::size_t>(j - 1)); }
};

namespace detail {

inline bool same_sign_or_zero(double a, double b) { return a * b >= 0.0; }

inline ChainSpec odd_chain(int unit_cells) { return {Model::SSH, unit_cells, Boundary::OPEN_ODD, 0.0}; }

}  // namespace detail

[[nodiscard]] inline std::vector<double> dense_hermitian_eigenvalues(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  const Eigen::VectorXd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

/// Closed-form spectrum of the odd chain: -|J1 + J2 e^{-ik_j}| for j < N,
/// 0 for j = N, +|J1 + J2 e^{-ik_j}| for j > N, with k_j = pi j / N.
[[nodiscard]] inline ExtendedModeTable odd_chain_spectrum(double j1, double j2, int unit_cells) {
  require(unit_cells >= 2, "odd chain needs at least 2 cells");
  require(std::isfinite(j1) && std::isfinite(j2), "couplings must be finite");
  ExtendedModeTable table;
  table.unit_cells = unit_cells;
  table.j1 = j1;
  table.j2 = j2;
  table.analytic = detail::same_sign_or_zero(j1, j2);
  const int count = 2 * unit_cells - 1;
  table.modes.resize(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j) {
    ExtendedMode& m = table.modes[static_cast<std::size_t>(j - 1)];
    m.j = j;
    m.k = std::numbers::pi * j / unit_cells;
    const Complex z = j1 + j2 * std::polar(1.0, -m.k);
    m.phase = std::arg(z);
    m.gap = std::abs(std::cos(m.k / 2.0));
    if (j < unit_cells) m.energy = -std::abs(z);
    else if (j > unit_cells) m.energy = std::abs(z);
    else m.energy = 0.0;
  }
  if (!table.analytic) {
    const auto ev = dense_hermitian_eigenvalues(dense_hamiltonian(detail::odd_chain(unit_cells), {.j1 = j1, .j2 = j2}));
    for (int j = 1; j <= count; ++j) table.modes[static_cast<std::size_t>(j - 1)].energy = ev[static_cast<std::size_t>(j - 1)];
  }
  return table;
}

/// Normalized eigenstate j of the odd chain.
///
/// Extended modes: (1/sqrt N)[-/+ sum_n sin(n k + phi)|n,A> + sum_{n<N} sin(n k)|n,B>],
/// minus for j < N. The edge mode is proportional to (-J1/J2)^{n-1} on A sites;
/// at J1 = J2 this is the uniform limit (-1)^{n-1}/sqrt N, at J2 = 0 it is |N,A>.
[[nodiscard]] inline RealVector odd_chain_eigenstate(int j, double j1, double j2, int unit_cells) {
  require(unit_cells >= 2, "odd chain needs at least 2 cells");
  require(j >= 1 && j <= 2 * unit_cells - 1, "mode index out of range");
  if (!detail::same_sign_or_zero(j1, j2)) throw DomainError("closed-form eigenstates need J1, J2 of equal sign");
  const int cells = unit_cells;
  RealVector v = RealVector::Zero(2 * cells - 1);
  auto a_site = [](int n) { return 2 * (n - 1); };
  auto b_site = [](int n) { return 2 * (n - 1) + 1; };
  if (j == cells) {
    require(j1 != 0.0 || j2 != 0.0, "edge mode undefined for J1 = J2 = 0");
    if (std::abs(j1) <= std::abs(j2)) {
      const double r = -j1 / j2;
      double amp = 1.0;
      for (int n = 1; n <= cells; ++n, amp *= r) v[a_site(n)] = amp;
    } else {
      // (-J1/J2)^{n-1} written from the right end to avoid overflow.
      const double q = -j2 / j1;
      const double sign = (cells - 1) % 2 == 0 ? 1.0 : -1.0;
      double amp = sign;
      for (int n = cells; n >= 1; --n, amp *= q) v[a_site(n)] = amp;
    }
    v /= v.norm();
    return v;
  }
  const double k = std::numbers::pi * j / cells;
  const double phi = std::arg(j1 + j2 * std::polar(1.0, -k));
  const double a_sign = j < cells ? -1.0 : 1.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(cells));
  for (int n = 1; n <= cells; ++n) v[a_site(n)] = a_sign * scale * std::sin(n * k + phi);
  for (int n = 1; n < cells; ++n) v[b_site(n)] = scale * std::sin(n * k);
  return v;
}

struct ExtendedProjection {
  std::vector<double> probability;  // index j-1; includes the edge mode at j = N
  std::vector<Complex> amplitude;   // <psi_j|psi> of the stored (unit-scale) vector
  double log_scale = 0.0;

  [[nodiscard]] double p(int j) const { return probability.at(static_cast<std::size_t>(j - 1)); }
  [[nodiscard]] Complex a(int j) const { return amplitude.at(static_cast<std::size_t>(j - 1)); }
};

/// p_j = |<psi_j|psi>|^2 exp(2 log_scale) over all 2N-1 analytic eigenstates.
[[nodiscard]] inline ExtendedProjection project_extended(const StateVector& state, double j1, double j2,
                                                         int unit_cells) {
  require(state.size() == 2 * unit_cells - 1, "state is not defined on the odd chain");
  ExtendedProjection out;
  out.log_scale = state.log_scale;
  const int count = 2 * unit_cells - 1;
  out.probability.resize(static_cast<std::size_t>(count));
  out.amplitude.resize(static_cast<std::size_t>(count));
  const double weight = std::exp(2.0 * state.log_scale);
  for (int j = 1; j <= count; ++j) {
    const RealVector mode = odd_chain_eigenstate(j, j1, j2, unit_cells);
    const Complex a = mode.cast<Complex>().dot(state.amplitudes);
    out.amplitude[static_cast<std::size_t>(j - 1)] = a;
    out.probability[static_cast<std::size_t>(j - 1)] = std::norm(a) * weight;
  }
  return out;
}

/// 2x2 Bloch Hamiltonian [[0, J1 + J2 e^{-ik}], [c.c., 0]] in the (A, B) basis.
struct BlochBlock {
  double k = 0.0;
  double energy = 0.0;  // eps_k = |J1 + J2 e^{-ik}|; eigenvalues are +/- energy
  Eigen::Vector2cd plus;
  Eigen::Vector2cd minus;
  bool gauge_arbitrary = false;  // eps_k == 0: any basis diagonalizes the block
  Eigen::Matrix2cd matrix;
};

[[nodiscard]] inline BlochBlock bloch_block(double k, double j1, double j2) {
  BlochBlock b;
  b.k = k;
  const Complex off = j1 + j2 * std::polar(1.0, -k);
  b.energy = std::abs(off);
  b.matrix << Complex{}, off, std::conj(off), Complex{};
  const double r = 1.0 / std::numbers::sqrt2;
  // A component real positive.
  if (b.energy == 0.0) {
    b.gauge_arbitrary = true;
    b.plus << r, r;
    b.minus << r, -r;
  } else {
    const Complex phase = std::conj(off) / b.energy;
    b.plus << r, r * phase;
    b.minus << r, -r * phase;
  }
  return b;
}

/// v_k = J1 J2 sin(k) / eps_k.
[[nodiscard]] inline double group_velocity(double k, double j1, double j2) {
  const double eps = std::abs(j1 + j2 * std::polar(1.0, -k));
  if (!(eps > 0.0)) throw DomainError("group velocity undefined where eps_k = 0");
  return j1 * j2 * std::sin(k) / eps;
}

inline constexpr Eigen::Index kMaxDenseSites = 2000;

/// Eigenvalues of H(t) sorted by real part then imaginary part. Hermitian models
/// return exactly real values; NH_SSH uses a general complex eigensolver.
[[nodiscard]] inline std::vector<Complex> instantaneous_spectrum(const ChainSpec& spec, const CouplingSet& c) {
  validate(spec);
  require(site_count(spec) <= kMaxDenseSites, "chain too large for dense diagonalization");
  const Eigen::MatrixXcd h = dense_hamiltonian(spec, c);
  std::vector<Complex> out;
  if (spec.model == Model::NH_SSH) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, false);
    if (solver.info() != Eigen::Success) throw NumericalError("complex eigensolver failed");
    const Eigen::VectorXcd ev = solver.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
  } else {
    for (double e : dense_hermitian_eigenvalues(h)) out.emplace_back(e, 0.0);
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

[[nodiscard]] inline std::vector<Complex> instantaneous_spectrum(const ChainSpec& spec, const QuenchProtocol& p,
                                                                 double t) {
  validate(spec, p);
  return instantaneous_spectrum(spec, schedule_at(p, t));
}

}  // namespace qtransport
