#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "qtransport/core.hpp"
#include "qtransport/state.hpp"

namespace qtransport {

enum class Model { SSH, CREUTZ, NH_SSH };
enum class Boundary { OPEN_EVEN, OPEN_ODD, PERIODIC };
enum class Sublattice { A, B };

struct ChainSpec {
  Model model = Model::SSH;
  int unit_cells = 2;
  Boundary boundary = Boundary::OPEN_EVEN;
  double gamma = 0.0;
};

/// Instantaneous couplings. SSH-type models read j1/j2, the Creutz ladder reads m/k/theta.
struct CouplingSet {
  double j1 = 0.0;
  double j2 = 0.0;
  double m = 0.0;
  double k = 0.0;
  double theta = 0.0;
};

/// One-based cell index plus sublattice; maps to zero-based storage 2(n-1) / 2(n-1)+1.
struct SiteIndex {
  int cell = 1;
  Sublattice sublattice = Sublattice::A;

  [[nodiscard]] Eigen::Index linear() const {
    return 2 * static_cast<Eigen::Index>(cell - 1) + (sublattice == Sublattice::B ? 1 : 0);
  }
  static SiteIndex from_linear(Eigen::Index s) {
    return {static_cast<int>(s / 2) + 1, s % 2 == 0 ? Sublattice::A : Sublattice::B};
  }
};

inline std::string_view to_string(Model m) {
  switch (m) {
    case Model::SSH: return "SSH";
    case Model::CREUTZ: return "CREUTZ";
    case Model::NH_SSH: return "NH_SSH";
  }
  return "?";
}

inline std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::OPEN_EVEN: return "OPEN_EVEN";
    case Boundary::OPEN_ODD: return "OPEN_ODD";
    case Boundary::PERIODIC: return "PERIODIC";
  }
  return "?";
}

inline Model parse_model(std::string_view s) {
  if (s == "SSH") return Model::SSH;
  if (s == "CREUTZ") return Model::CREUTZ;
  if (s == "NH_SSH") return Model::NH_SSH;
  throw ConfigError("unknown model '" + std::string(s) + "'");
}

inline Boundary parse_boundary(std::string_view s) {
  if (s == "OPEN_EVEN") return Boundary::OPEN_EVEN;
  if (s == "OPEN_ODD") return Boundary::OPEN_ODD;
  if (s == "PERIODIC") return Boundary::PERIODIC;
  throw ConfigError("unknown boundary '" + std::string(s) + "'");
}

inline void validate(const ChainSpec& spec) {
  require(spec.unit_cells >= 2, "unit_cells must be >= 2");
  require(spec.boundary != Boundary::OPEN_ODD || spec.model == Model::SSH,
          "OPEN_ODD boundary is only defined for the SSH model");
  require(std::isfinite(spec.gamma) && spec.gamma >= 0.0, "gamma must be finite and >= 0");
  require(spec.gamma == 0.0 || spec.model == Model::NH_SSH, "gamma is only allowed for NH_SSH");
  require(!(spec.model == Model::CREUTZ && spec.boundary == Boundary::PERIODIC && spec.unit_cells < 3),
          "periodic Creutz ladder needs at least 3 cells");
}

inline void validate(const CouplingSet& c) {
  require(std::isfinite(c.j1) && std::isfinite(c.j2) && std::isfinite(c.m) && std::isfinite(c.k) &&
              std::isfinite(c.theta),
          "couplings must be finite");
}

[[nodiscard]] inline Eigen::Index site_count(const ChainSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.unit_cells);
  return spec.boundary == Boundary::OPEN_ODD ? 2 * n - 1 : 2 * n;
}

namespace detail {

// Visits the nonzero pattern of row `i` in ascending column order. Both the
// sparse matrix and the matrix-free action are produced from this single
// routine, so the two agree exactly.
template <class Visit>
inline void ssh_row(Eigen::Index i, Eigen::Index sites, bool periodic, bool non_hermitian,
                    double j1, double j2, Complex gain, Visit&& visit) {
  if (i % 2 == 0) {
    if (i > 0) visit(i - 1, Complex(j2));
    if (non_hermitian) visit(i, gain);
    if (i + 1 < sites) visit(i + 1, Complex(j1));
    if (periodic && i == 0) visit(sites - 1, Complex(j2));
  } else {
    if (periodic && i == sites - 1) visit(Eigen::Index{0}, Complex(j2));
    visit(i - 1, Complex(j1));
    if (non_hermitian) visit(i, -gain);
    if (i + 1 < sites) visit(i + 1, Complex(j2));
  }
}

struct CreutzCoefficients {
  Complex vertical;   // -M
  Complex diagonal;   // -K
  Complex phase_fwd;  // -K e^{+i theta}
  Complex phase_bwd;  // -K e^{-i theta}

  explicit CreutzCoefficients(const CouplingSet& c)
      : vertical(-c.m),
        diagonal(-c.k),
        phase_fwd(-c.k * std::polar(1.0, c.theta)),
        phase_bwd(-c.k * std::polar(1.0, -c.theta)) {}
};

template <class Visit>
inline void creutz_row(Eigen::Index i, Eigen::Index cells, bool periodic, const CreutzCoefficients& co,
                       Visit&& visit) {
  const Eigen::Index n = i / 2;
  const bool is_a = i % 2 == 0;
  // Leg hoppings seen from this row: toward the previous cell (conjugated
  // phase for A, direct phase for B) and toward the next cell.
  auto left = [&](Eigen::Index c) {
    if (is_a) {
      visit(2 * c, co.phase_bwd);
      visit(2 * c + 1, co.diagonal);
    } else {
      visit(2 * c, co.diagonal);
      visit(2 * c + 1, co.phase_fwd);
    }
  };
  auto right = [&](Eigen::Index c) {
    if (is_a) {
      visit(2 * c, co.phase_fwd);
      visit(2 * c + 1, co.diagonal);
    } else {
      visit(2 * c, co.diagonal);
      visit(2 * c + 1, co.phase_bwd);
    }
  };
  auto own = [&] { visit(is_a ? i + 1 : i - 1, co.vertical); };

  const bool has_left = n > 0;
  const bool has_right = n + 1 < cells;
  if (periodic && n == cells - 1) right(0);
  if (has_left) left(n - 1);
  own();
  if (has_right) right(n + 1);
  if (periodic && n == 0) left(cells - 1);
}

template <class Visit>
inline void for_each_entry(const ChainSpec& spec, const CouplingSet& c, Eigen::Index row, Visit&& visit) {
  const bool periodic = spec.boundary == Boundary::PERIODIC;
  switch (spec.model) {
    case Model::SSH:
      ssh_row(row, site_count(spec), periodic, false, c.j1, c.j2, Complex{}, visit);
      break;
    case Model::NH_SSH:
      ssh_row(row, site_count(spec), periodic, true, c.j1, c.j2, Complex(0.0, spec.gamma), visit);
      break;
    case Model::CREUTZ:
      creutz_row(row, spec.unit_cells, periodic, CreutzCoefficients(c), visit);
      break;
  }
}

}  // namespace detail

using SparseHamiltonian = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Sparse matrix of H in the interleaved (n,A),(n,B) basis.
///
/// SSH: J1 on (n,A)-(n,B), J2 on (n+1,A)-(n,B); periodic chains add the
/// (1,A)-(N,B) wrap bond. NH_SSH adds +i*gamma on A and -i*gamma on B.
/// Creutz ladder: H = -sum[K(a+_n b_{n+1} + b+_n a_{n+1}) + K(e^{i theta} a+_n a_{n+1}
/// + e^{-i theta} b+_n b_{n+1}) + M a+_n b_n + h.c.].
[[nodiscard]] inline SparseHamiltonian build_hamiltonian(const ChainSpec& spec, const CouplingSet& c) {
  validate(spec);
  validate(c);
  const Eigen::Index sites = site_count(spec);
  SparseHamiltonian h(sites, sites);
  h.reserve(Eigen::VectorXi::Constant(sites, 5));
  for (Eigen::Index row = 0; row < sites; ++row) {
    detail::for_each_entry(spec, c, row, [&](Eigen::Index col, Complex v) { h.insert(row, col) = v; });
  }
  h.makeCompressed();
  return h;
}

[[nodiscard]] inline Eigen::MatrixXcd dense_hamiltonian(const ChainSpec& spec, const CouplingSet& c) {
  return Eigen::MatrixXcd(build_hamiltonian(spec, c));
}

namespace detail {

// Complex products written out so the compiler keeps them inline; for finite
// operands they round exactly like std::complex operator*.
struct Cx {
  double re, im;
};
inline Cx mul(Cx a, Cx b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline Cx add(Cx a, Cx b) { return {a.re + b.re, a.im + b.im}; }
// Real coefficient times complex: equal in value to Complex(s, 0) * b (only the sign of a zero may differ).
inline Cx scale(double s, Cx b) { return {s * b.re, s * b.im}; }
inline Cx to_cx(Complex z) { return {z.real(), z.imag()}; }

/// Computes (H x)_i for every row belonging to cells [cell_lo, cell_hi) and
/// hands it to sink(i, value). Rows of the two end cells go through the shared
/// row visitor; interior rows use unrolled stencils with the same summation
/// order, so every route yields identical values.
template <class Sink>
inline void for_each_row_value(const ChainSpec& spec, const CouplingSet& c, const Complex* xz,
                               Eigen::Index cell_lo, Eigen::Index cell_hi, Sink&& sink) {
  const Eigen::Index sites = site_count(spec);
  const Eigen::Index cells = spec.unit_cells;
  const bool periodic = spec.boundary == Boundary::PERIODIC;
  const auto* x = reinterpret_cast<const Cx*>(xz);
  auto generic_cell = [&](Eigen::Index cell, auto&& row_fn) {
    for (Eigen::Index row = 2 * cell; row < std::min(2 * cell + 2, sites); ++row) {
      Complex acc{0.0, 0.0};
      row_fn(row, [&](Eigen::Index col, Complex v) { acc += v * xz[col]; });
      sink(row, to_cx(acc));
    }
  };
  const Eigen::Index first = std::max<Eigen::Index>(cell_lo, 1);
  const Eigen::Index last = std::min<Eigen::Index>(cell_hi, cells - 1);
  switch (spec.model) {
    case Model::SSH:
    case Model::NH_SSH: {
      const bool nh = spec.model == Model::NH_SSH;
      const Complex gainz(0.0, spec.gamma);
      auto row_fn = [&](Eigen::Index row, auto&& visit) {
        ssh_row(row, sites, periodic, nh, c.j1, c.j2, gainz, visit);
      };
      if (cell_lo == 0) generic_cell(0, row_fn);
      const Cx gain = to_cx(gainz);
      const Cx loss = to_cx(-gainz);
      const double j1 = c.j1;
      const double j2 = c.j2;
      if (nh) {
        for (Eigen::Index n = first; n < last; ++n) {
          const Eigen::Index a = 2 * n;
          sink(a, add(add(scale(j2, x[a - 1]), mul(gain, x[a])), scale(j1, x[a + 1])));
          sink(a + 1, add(add(scale(j1, x[a]), mul(loss, x[a + 1])), scale(j2, x[a + 2])));
        }
      } else {
        for (Eigen::Index n = first; n < last; ++n) {
          const Eigen::Index a = 2 * n;
          sink(a, add(scale(j2, x[a - 1]), scale(j1, x[a + 1])));
          sink(a + 1, add(scale(j1, x[a]), scale(j2, x[a + 2])));
        }
      }
      if (cell_hi == cells) generic_cell(cells - 1, row_fn);
      break;
    }
    case Model::CREUTZ: {
      const CreutzCoefficients co(c);
      auto row_fn = [&](Eigen::Index row, auto&& visit) { creutz_row(row, cells, periodic, co, visit); };
      if (cell_lo == 0) generic_cell(0, row_fn);
      const double v = co.vertical.real();
      const double d = co.diagonal.real();
      const Cx pf = to_cx(co.phase_fwd);
      const Cx pb = to_cx(co.phase_bwd);
      for (Eigen::Index n = first; n < last; ++n) {
        const Eigen::Index a = 2 * n;
        Cx acc = mul(pb, x[a - 2]);
        acc = add(acc, scale(d, x[a - 1]));
        acc = add(acc, scale(v, x[a + 1]));
        acc = add(acc, mul(pf, x[a + 2]));
        sink(a, add(acc, scale(d, x[a + 3])));
        Cx bcc = scale(d, x[a - 2]);
        bcc = add(bcc, mul(pf, x[a - 1]));
        bcc = add(bcc, scale(v, x[a]));
        bcc = add(bcc, scale(d, x[a + 2]));
        sink(a + 1, add(bcc, mul(pb, x[a + 3])));
      }
      if (cell_hi == cells) generic_cell(cells - 1, row_fn);
      break;
    }
  }
}

}  // namespace detail

/// out = H psi without materializing H. `out` must not alias `psi`.
/// Agrees exactly with build_hamiltonian(spec, c) * psi.
inline void apply_hamiltonian(const ChainSpec& spec, const CouplingSet& c, const ComplexVector& psi,
                              ComplexVector& out) {
  const Eigen::Index sites = site_count(spec);
  if (psi.size() != sites) throw ConfigError("state length does not match the chain site count");
  out.resize(sites);
  auto* y = reinterpret_cast<detail::Cx*>(out.data());
  detail::for_each_row_value(spec, c, psi.data(), 0, spec.unit_cells, [y](Eigen::Index i, detail::Cx v) { y[i] = v; });
}

[[nodiscard]] inline ComplexVector apply_hamiltonian(const ChainSpec& spec, const CouplingSet& c,
                                                     const ComplexVector& psi) {
  ComplexVector out;
  apply_hamiltonian(spec, c, psi, out);
  return out;
}

enum class InitialKind { SSH_LEFT_EDGE, SSH_BULK, CREUTZ_PLAQUETTE, CREUTZ_LEFT_EDGE };

struct InitialState {
  InitialKind kind = InitialKind::SSH_LEFT_EDGE;
  int cell = 0;  // used by SSH_BULK and CREUTZ_PLAQUETTE
};

inline std::string_view to_string(InitialKind k) {
  switch (k) {
    case InitialKind::SSH_LEFT_EDGE: return "SSH_LEFT_EDGE";
    case InitialKind::SSH_BULK: return "SSH_BULK";
    case InitialKind::CREUTZ_PLAQUETTE: return "CREUTZ_PLAQUETTE";
    case InitialKind::CREUTZ_LEFT_EDGE: return "CREUTZ_LEFT_EDGE";
  }
  return "?";
}

inline InitialKind parse_initial_kind(std::string_view s) {
  if (s == "SSH_LEFT_EDGE") return InitialKind::SSH_LEFT_EDGE;
  if (s == "SSH_BULK") return InitialKind::SSH_BULK;
  if (s == "CREUTZ_PLAQUETTE") return InitialKind::CREUTZ_PLAQUETTE;
  if (s == "CREUTZ_LEFT_EDGE") return InitialKind::CREUTZ_LEFT_EDGE;
  throw ConfigError("unknown initial state '" + std::string(s) + "'");
}

[[nodiscard]] inline StateVector initial_state(const ChainSpec& spec, const InitialState& init) {
  validate(spec);
  const bool ssh_like = spec.model == Model::SSH || spec.model == Model::NH_SSH;
  const bool bulk_kind = init.kind == InitialKind::SSH_BULK || init.kind == InitialKind::CREUTZ_PLAQUETTE;
  if (bulk_kind) {
    require(init.cell >= 2 && init.cell <= spec.unit_cells - 2, "initial cell must satisfy 2 <= n <= N-2");
  }
  StateVector s;
  s.amplitudes = ComplexVector::Zero(site_count(spec));
  auto at = [&](int cell, Sublattice sub) -> Complex& { return s.amplitudes[SiteIndex{cell, sub}.linear()]; };
  const double r2 = 1.0 / std::numbers::sqrt2;
  switch (init.kind) {
    case InitialKind::SSH_LEFT_EDGE:
      require(ssh_like, "SSH_LEFT_EDGE requires an SSH-type model");
      at(1, Sublattice::A) = 1.0;
      break;
    case InitialKind::SSH_BULK:
      require(ssh_like, "SSH_BULK requires an SSH-type model");
      at(init.cell, Sublattice::B) = r2;
      at(init.cell + 1, Sublattice::A) = r2;
      break;
    case InitialKind::CREUTZ_PLAQUETTE:
      require(spec.model == Model::CREUTZ, "CREUTZ_PLAQUETTE requires the Creutz model");
      at(init.cell, Sublattice::A) = Complex(0.0, -0.5);
      at(init.cell, Sublattice::B) = 0.5;
      at(init.cell + 1, Sublattice::A) = 0.5;
      at(init.cell + 1, Sublattice::B) = Complex(0.0, -0.5);
      break;
    case InitialKind::CREUTZ_LEFT_EDGE:
      require(spec.model == Model::CREUTZ, "CREUTZ_LEFT_EDGE requires the Creutz model");
      at(1, Sublattice::A) = r2;
      at(1, Sublattice::B) = Complex(0.0, -r2);
      break;
  }
  return s;
}

/// Chiral operator diag(+1 on A, -1 on B).
[[nodiscard]] inline RealVector chiral_diagonal(const ChainSpec& spec) {
  RealVector g(site_count(spec));
  for (Eigen::Index s = 0; s < g.size(); ++s) g[s] = s % 2 == 0 ? 1.0 : -1.0;
  return g;
}

}  // namespace qtransport
