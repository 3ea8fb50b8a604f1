#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qtransport/core.hpp"
#include "qtransport/observables.hpp"
#include "qtransport/spectrum.hpp"

namespace qtransport {

struct ScalingSample {
  double beta = 0.0;
  double value = 0.0;
};

struct FitWindow {
  double beta_lo = 0.0;
  double beta_hi = 0.0;
};

/// y = prefactor * beta^{slope}; exponent = |slope| with `decreasing` telling the sign.
struct ScalingFit {
  double exponent = 0.0;
  double slope = 0.0;
  double prefactor = 0.0;
  bool decreasing = false;
  FitWindow window;
  double r_squared = 0.0;
  std::size_t points = 0;

  [[nodiscard]] double predict(double beta) const { return prefactor * std::pow(beta, slope); }
};

/// Drops the two largest beta values, which sit where the distance falls below the power law.
[[nodiscard]] inline FitWindow default_fit_window(std::vector<double> betas) {
  require(!betas.empty(), "no samples");
  std::sort(betas.begin(), betas.end());
  const std::size_t keep = betas.size() >= 6 ? betas.size() - 2 : betas.size();
  return {betas.front(), betas[keep - 1]};
}

/// Ordinary least squares of ln y against ln beta over the samples inside `window`.
[[nodiscard]] inline ScalingFit fit_power_law(std::span<const ScalingSample> samples, FitWindow window) {
  require(window.beta_lo < window.beta_hi, "fit window must have beta_lo < beta_hi");
  const double lo = window.beta_lo * (1.0 - 1e-12);
  const double hi = window.beta_hi * (1.0 + 1e-12);
  std::vector<std::pair<double, double>> xy;
  for (const auto& s : samples) {
    if (s.beta < lo || s.beta > hi) continue;
    if (!(s.beta > 0.0) || !(s.value > 0.0)) throw ConfigError("power-law fit needs positive beta and values");
    xy.emplace_back(std::log(s.beta), std::log(s.value));
  }
  if (xy.size() < 4) throw ConfigError("power-law fit needs at least 4 samples in the window");
  const double n = static_cast<double>(xy.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.exponent = std::abs(fit.slope);
  fit.decreasing = fit.slope < 0.0;
  fit.prefactor = std::exp(my - fit.slope * mx);
  fit.window = window;
  fit.points = xy.size();
  double ss_res = 0.0;
  for (const auto& [x, y] : xy) {
    const double r = y - (my + fit.slope * (x - mx));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

/// p = c3 (1 - exp(-c1 x)) exp(-c2 x) with x = Delta^2 / beta.
struct AnsatzFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double peak_x = 0.0;  // ln(1 + c1/c2) / c1
  double rms_residual = 0.0;
  int iterations = 0;
  std::size_t points = 0;

  [[nodiscard]] double operator()(double x) const { return c3 * (1.0 - std::exp(-c1 * x)) * std::exp(-c2 * x); }
};

struct AnsatzPoint {
  double gap = 0.0;  // Delta_j
  double p = 0.0;
};

[[nodiscard]] inline double ansatz_peak(double c1, double c2) { return std::log1p(c1 / c2) / c1; }

/// Levenberg-Marquardt on log(c1), log(c2), log(c3), started from c1 = c2 = 1, c3 = e max(p).
[[nodiscard]] inline AnsatzFit fit_ansatz(std::span<const AnsatzPoint> points, double beta, int max_iterations = 500) {
  require(beta > 0.0, "beta must be positive");
  require(points.size() >= 3, "ansatz fit needs at least 3 points");
  std::vector<double> xs;
  std::vector<double> ps;
  double p_max = 0.0;
  for (const auto& pt : points) {
    xs.push_back(pt.gap * pt.gap / beta);
    ps.push_back(pt.p);
    p_max = std::max(p_max, pt.p);
  }
  require(p_max > 0.0, "ansatz fit needs positive probabilities");
  const auto m = static_cast<Eigen::Index>(xs.size());
  Eigen::Vector3d u(0.0, 0.0, std::log(p_max * std::numbers::e));

  auto residuals = [&](const Eigen::Vector3d& par, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double c1 = std::exp(par[0]);
    const double c2 = std::exp(par[1]);
    const double c3 = std::exp(par[2]);
    r.resize(m);
    if (jac) jac->resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double x = xs[static_cast<std::size_t>(i)];
      const double e1 = std::exp(-c1 * x);
      const double e2 = std::exp(-c2 * x);
      const double f = c3 * (1.0 - e1) * e2;
      r[i] = f - ps[static_cast<std::size_t>(i)];
      if (jac) {
        (*jac)(i, 0) = c1 * c3 * x * e1 * e2;
        (*jac)(i, 1) = -c2 * x * f;
        (*jac)(i, 2) = f;
      }
    }
    return 0.5 * r.squaredNorm();
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double cost = residuals(u, r, &jac);
  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-30 + 1e-14 * cost) {
      converged = true;
      break;
    }
    bool accepted = false;
    while (lambda < 1e20) {
      Eigen::Matrix3d a = jtj;
      for (int d = 0; d < 3; ++d) a(d, d) += lambda * std::max(jtj(d, d), 1e-300);
      const Eigen::Vector3d step = a.ldlt().solve(-grad);
      const Eigen::Vector3d trial = u + step;
      Eigen::VectorXd r_trial;
      const double cost_trial = residuals(trial, r_trial, nullptr);
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        const double rel = (cost - cost_trial) / std::max(cost, 1e-300);
        u = trial;
        cost = residuals(u, r, &jac);
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        if (rel < 1e-15 || step.lpNorm<Eigen::Infinity>() < 1e-13) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left: at a minimum to working precision.
      converged = true;
      break;
    }
    if (converged) break;
  }
  if (!converged) throw NumericalError("ansatz fit did not converge");
  AnsatzFit fit;
  fit.c1 = std::exp(u[0]);
  fit.c2 = std::exp(u[1]);
  fit.c3 = std::exp(u[2]);
  fit.peak_x = ansatz_peak(fit.c1, fit.c2);
  fit.rms_residual = std::sqrt(2.0 * cost / static_cast<double>(m));
  fit.iterations = it;
  fit.points = xs.size();
  return fit;
}

/// Closed-form edge travel distance
/// d = (1/(8 sqrt b)) [ (2-b)/(1-b) arccosh(1/sqrt b) - (1-b)^{-1/2} ].
/// Written with arccosh(1/sqrt b) = artanh(sqrt(1-b)); for b -> 1 the bracket is
/// summed as sum_{m>=1} 4m/(4m^2-1) a^{2m-1}, a = sqrt(1-b).
[[nodiscard]] inline double d_edge_closed_form(double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (beta >= 1.0) throw DomainError("closed-form edge distance is only valid for beta < 1");
  const double a = std::sqrt(1.0 - beta);
  double bracket = 0.0;
  if (a < 0.05) {
    double term = a;
    for (int m = 1; m <= 12; ++m, term *= a * a) bracket += 4.0 * m / (4.0 * m * m - 1.0) * term;
  } else {
    bracket = (2.0 - beta) / (1.0 - beta) * std::atanh(a) - 1.0 / a;
  }
  return bracket / (8.0 * std::sqrt(beta));
}

/// Leading small-beta form (ln(4/b) - 1) / (8 sqrt b).
[[nodiscard]] inline double d_edge_leading_order(double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  return (std::log(4.0 / beta) - 1.0) / (8.0 * std::sqrt(beta));
}

struct LzsBound {
  double bound = 0.0;        // |2 sum p_k e^{i phi_k}|^2
  double cosine_form = 0.0;  // (2 sum p_k cos phi_k)^2
};

[[nodiscard]] inline LzsBound lzs_return_bound(std::span<const double> p, std::span<const double> phi) {
  require(p.size() == phi.size(), "p and phi differ in length");
  Complex sum{};
  double cos_sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    require(p[i] >= 0.0, "probabilities must be non-negative");
    sum += p[i] * std::polar(1.0, phi[i]);
    cos_sum += p[i] * std::cos(phi[i]);
  }
  return {4.0 * std::norm(sum), 4.0 * cos_sum * cos_sum};
}

/// Positive-energy amplitudes c_k at the end of the first half of a periodic
/// quench, expanded on the eigenstates of H(J1 = 1, J2 = 0): odd-chain extended
/// modes j > N on OPEN_ODD, the dimers |n,+> on OPEN_EVEN. p_k = |c_k|^2 and
/// phi_k = -2 arg c_k, the phase of the amplitude returned to |1,A> through mode k
/// once the mirrored second half has run.
struct LzsModes {
  std::vector<double> p;
  std::vector<double> phi;
};

[[nodiscard]] inline LzsModes lzs_modes(const StateVector& half, const ChainSpec& spec) {
  validate(spec);
  require(spec.model == Model::SSH && spec.boundary != Boundary::PERIODIC, "LZS modes need an open SSH chain");
  require(half.size() == site_count(spec), "state length does not match the chain");
  LzsModes out;
  auto push = [&](Complex c) {
    out.p.push_back(std::norm(c));
    out.phi.push_back(-2.0 * std::arg(c));
  };
  if (spec.boundary == Boundary::OPEN_ODD) {
    const ExtendedProjection proj = project_extended(half, 1.0, 0.0, spec.unit_cells);
    const double scale = std::exp(proj.log_scale);
    for (int j = spec.unit_cells + 1; j <= 2 * spec.unit_cells - 1; ++j) push(proj.a(j) * scale);
  } else {
    const double scale = std::exp(half.log_scale) / std::numbers::sqrt2;
    for (int n = 1; n <= spec.unit_cells; ++n) {
      const auto a = static_cast<Eigen::Index>(2 * (n - 1));
      push((half.amplitudes[a] + half.amplitudes[a + 1]) * scale);
    }
  }
  return out;
}

/// Adiabatic estimate of phi_k for k near pi: the area 1/(2 beta) under eps_k(t).
[[nodiscard]] inline double lzs_analytic_phase(double beta) {
  require(beta > 0.0, "beta must be positive");
  return 0.5 / beta;
}

/// y = mean + amplitude cos(omega x - phase).
struct SinusoidFit {
  double omega = 0.0;
  double mean = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;
  double r_squared = 0.0;

  [[nodiscard]] double maximum() const { return mean + amplitude; }
};

/// Linear least squares for the mean and quadratures at fixed omega.
[[nodiscard]] inline SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y, double omega) {
  require(x.size() == y.size(), "x and y differ in length");
  require(x.size() >= 3, "sinusoid fit needs at least 3 points");
  const auto m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(omega * xi);
    a(i, 2) = std::sin(omega * xi);
    b[i] = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(b);
  SinusoidFit fit;
  fit.omega = omega;
  fit.mean = coef[0];
  fit.amplitude = std::hypot(coef[1], coef[2]);
  fit.phase = std::atan2(coef[2], coef[1]);
  const double ss_tot = (b.array() - b.mean()).square().sum();
  const double ss_res = (a * coef - b).squaredNorm();
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

/// Best single-frequency fit with omega in [omega_lo, omega_hi]: a grid scan of the
/// explained variance followed by golden-section refinement.
[[nodiscard]] inline SinusoidFit dominant_frequency(std::span<const double> x, std::span<const double> y,
                                                    double omega_lo, double omega_hi, int grid = 4000) {
  require(0.0 < omega_lo && omega_lo < omega_hi, "frequency range must satisfy 0 < lo < hi");
  auto score = [&](double w) { return fit_sinusoid(x, y, w).r_squared; };
  double best_w = omega_lo;
  double best = -1.0;
  const double step = (omega_hi - omega_lo) / grid;
  for (int i = 0; i <= grid; ++i) {
    const double w = omega_lo + step * i;
    const double s = score(w);
    if (s > best) {
      best = s;
      best_w = w;
    }
  }
  double a = std::max(omega_lo, best_w - step);
  double b = std::min(omega_hi, best_w + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = score(c);
  double fd = score(d);
  for (int it = 0; it < 100 && b - a > 1e-12 * best_w; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = score(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = score(d);
    }
  }
  return fit_sinusoid(x, y, 0.5 * (a + b));
}

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature.
template <class F>
[[nodiscard]] double integrate(F&& f, double a, double b, double tol = 1e-12, int max_depth = 50) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Distance covered by mode k between t = 1/(2 beta) and 1/beta of the linear quench,
/// the integral of |v_k| with J1 = beta t, J2 = 1 - beta t.
[[nodiscard]] inline double mode_travel_distance(double k, double beta) {
  require(beta > 0.0, "beta must be positive");
  const double sk = std::abs(std::sin(k));
  const double ck = std::cos(k);
  auto speed = [&](double s) {
    const double j1 = s;
    const double j2 = 1.0 - s;
    const double eps = std::sqrt(std::max(j1 * j1 + j2 * j2 + 2.0 * j1 * j2 * ck, 0.0));
    return eps > 0.0 ? j1 * j2 * sk / eps : 0.0;
  };
  return integrate(speed, 0.5, 1.0, 1e-13) / beta;
}

struct TravelingPackage {
  double p = 0.0;
  double distance = 0.0;
};

/// Packages for the positive-energy extended modes j = N+1 .. 2N-1 of an odd chain.
[[nodiscard]] inline std::vector<TravelingPackage> traveling_packages(const ExtendedProjection& proj, int unit_cells,
                                                                      double beta) {
  std::vector<TravelingPackage> out;
  for (int j = unit_cells + 1; j <= 2 * unit_cells - 1; ++j) {
    const double k = std::numbers::pi * j / unit_cells;
    out.push_back({proj.p(j), mode_travel_distance(k, beta)});
  }
  return out;
}

/// profile(n) = sum_j (p_j / W) rect[(n - 1 - d_j) / W], rect = 1 on [-1/2, 1/2).
/// Only p_plus is modelled; p_minus stays zero.
[[nodiscard]] inline DimerProfile reconstruct_profile(std::span<const TravelingPackage> packages, int width,
                                                      int cells) {
  require(width > 0, "package width must be positive");
  require(cells > 0, "profile needs at least one cell");
  DimerProfile out;
  out.p_plus.assign(static_cast<std::size_t>(cells), 0.0);
  out.p_minus.assign(static_cast<std::size_t>(cells), 0.0);
  const double w = width;
  for (const auto& pkg : packages) {
    const double height = pkg.p / w;
    const double start = 1.0 + pkg.distance - 0.5 * w;  // first n with (n-1-d)/W >= -1/2
    const int n_first = std::max(1, static_cast<int>(std::ceil(start)));
    for (int n = n_first; n <= cells; ++n) {
      const double u = (n - 1.0 - pkg.distance) / w;
      if (u >= 0.5) break;
      if (u >= -0.5) out.p_plus[static_cast<std::size_t>(n - 1)] += height;
    }
  }
  return out;
}

/// Integer width minimizing the normalized L1 distance to `exact` over [1, max_width].
[[nodiscard]] inline int fit_package_width(std::span<const TravelingPackage> packages, const DimerProfile& exact,
                                           int max_width = 200) {
  int best = 1;
  double best_l1 = INFINITY;
  for (int w = 1; w <= max_width; ++w) {
    const double l1 = normalized_l1_distance(reconstruct_profile(packages, w, exact.size()).p_plus, exact.p_plus);
    if (l1 < best_l1) {
      best_l1 = l1;
      best = w;
    }
  }
  return best;
}

/// F = [max(1 - 2 exp(-2/(N^2 beta)), 0)]^2.
[[nodiscard]] inline double fidelity_formula(int unit_cells, double beta) {
  require(unit_cells >= 2, "fidelity formula needs N >= 2");
  require(beta > 0.0, "beta must be positive");
  const double n = unit_cells;
  const double base = std::max(1.0 - 2.0 * std::exp(-2.0 / (n * n * beta)), 0.0);
  return base * base;
}

/// Points (Delta_j, p_j) of the positive-energy extended modes of an odd-chain projection.
[[nodiscard]] inline std::vector<AnsatzPoint> ansatz_points(const ExtendedProjection& proj, int unit_cells) {
  std::vector<AnsatzPoint> out;
  for (int j = unit_cells + 1; j <= 2 * unit_cells - 1; ++j) {
    const double k = std::numbers::pi * j / unit_cells;
    out.push_back({std::abs(std::cos(k / 2.0)), proj.p(j)});
  }
  return out;
}

}  // namespace qtransport
