#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "qtransport/core.hpp"
#include "qtransport/models.hpp"

namespace qtransport {

enum class ProtocolKind { LINEAR, SINUSOIDAL, SUDDEN, PERIODIC, CREUTZ_MK, CREUTZ_THETA, NH_LINEAR };

struct QuenchProtocol {
  ProtocolKind kind = ProtocolKind::LINEAR;
  double beta = 1e-3;
  // Constant couplings held by SUDDEN.
  double sudden_j1 = 0.5;
  double sudden_j2 = 0.5;
};

inline std::string_view to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::LINEAR: return "LINEAR";
    case ProtocolKind::SINUSOIDAL: return "SINUSOIDAL";
    case ProtocolKind::SUDDEN: return "SUDDEN";
    case ProtocolKind::PERIODIC: return "PERIODIC";
    case ProtocolKind::CREUTZ_MK: return "CREUTZ_MK";
    case ProtocolKind::CREUTZ_THETA: return "CREUTZ_THETA";
    case ProtocolKind::NH_LINEAR: return "NH_LINEAR";
  }
  return "?";
}

inline ProtocolKind parse_protocol_kind(std::string_view s) {
  for (auto k : {ProtocolKind::LINEAR, ProtocolKind::SINUSOIDAL, ProtocolKind::SUDDEN, ProtocolKind::PERIODIC,
                 ProtocolKind::CREUTZ_MK, ProtocolKind::CREUTZ_THETA, ProtocolKind::NH_LINEAR}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

inline void validate(const QuenchProtocol& p) {
  require(std::isfinite(p.beta) && p.beta > 0.0, "beta must be positive and finite");
  if (p.kind == ProtocolKind::SUDDEN) {
    require(std::isfinite(p.sudden_j1) && std::isfinite(p.sudden_j2) && p.sudden_j1 != 0.0 && p.sudden_j2 != 0.0,
            "SUDDEN needs two non-zero finite couplings");
  }
}

inline void validate(const ChainSpec& spec, const QuenchProtocol& p) {
  validate(spec);
  validate(p);
  const bool creutz_protocol = p.kind == ProtocolKind::CREUTZ_MK || p.kind == ProtocolKind::CREUTZ_THETA;
  if (spec.model == Model::CREUTZ) {
    require(creutz_protocol, "the Creutz ladder needs a CREUTZ_MK or CREUTZ_THETA protocol");
  } else {
    require(!creutz_protocol, std::string(to_string(p.kind)) + " only applies to the Creutz ladder");
  }
}

[[nodiscard]] inline double t_end(const QuenchProtocol& p) {
  switch (p.kind) {
    case ProtocolKind::SINUSOIDAL: return std::numbers::pi / (2.0 * p.beta);
    case ProtocolKind::PERIODIC: return 2.0 / p.beta;
    case ProtocolKind::CREUTZ_THETA: return std::numbers::pi / p.beta;
    default: return 1.0 / p.beta;
  }
}

/// Couplings before the quench starts; the initial states are eigenstates of this Hamiltonian.
[[nodiscard]] inline CouplingSet initial_couplings(const QuenchProtocol& p) {
  if (p.kind == ProtocolKind::CREUTZ_MK || p.kind == ProtocolKind::CREUTZ_THETA) {
    return {.m = 0.0, .k = 1.0, .theta = -std::numbers::pi / 2.0};
  }
  return {.j1 = 0.0, .j2 = 1.0};
}

/// Couplings at time t. SUDDEN holds its constants for the entire window, the
/// jump from initial_couplings() happens at t = 0.
[[nodiscard]] inline CouplingSet schedule_at(const QuenchProtocol& p, double t) {
  const double end = t_end(p);
  if (!(t >= 0.0 && t <= end * (1.0 + 1e-12))) {
    throw ConfigError("time " + std::to_string(t) + " outside the protocol window");
  }
  const double bt = p.beta * t;
  switch (p.kind) {
    case ProtocolKind::LINEAR:
    case ProtocolKind::NH_LINEAR:
      return {.j1 = bt, .j2 = 1.0 - bt};
    case ProtocolKind::SINUSOIDAL: {
      const double s = std::sin(bt);
      const double c = std::cos(bt);
      return {.j1 = s * s, .j2 = c * c};
    }
    case ProtocolKind::SUDDEN:
      return {.j1 = p.sudden_j1, .j2 = p.sudden_j2};
    case ProtocolKind::PERIODIC:
      if (bt <= 1.0) return {.j1 = bt, .j2 = 1.0 - bt};
      return {.j1 = 2.0 - bt, .j2 = bt - 1.0};
    case ProtocolKind::CREUTZ_MK:
      return {.m = bt, .k = 1.0 - bt, .theta = -std::numbers::pi / 2.0};
    case ProtocolKind::CREUTZ_THETA:
      return {.m = 0.0, .k = 1.0, .theta = bt - std::numbers::pi / 2.0};
  }
  return {};
}

}  // namespace qtransport
