#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtransport.hpp"

namespace qtransport::cli {

using json = nlohmann::json;

/// Everything a command needs. Defaults: open even chain, linear quench from the
/// left edge.
struct RunConfig {
  ChainSpec chain{Model::SSH, 600, Boundary::OPEN_EVEN, 0.0};
  ProtocolKind protocol = ProtocolKind::LINEAR;
  std::vector<double> betas{1e-3};
  double sudden_j1 = 0.5;
  double sudden_j2 = 0.5;
  InitialState initial{InitialKind::SSH_LEFT_EDGE, 0};  // cell 0: N/2 for bulk kinds
  std::optional<double> dt;                              // empty: default_dt(gamma)
  bool dt_auto = false;
  double tolerance = 1e-8;
  std::vector<double> snapshots;
  std::string out_dir;
  unsigned observables = kTransport | kReturnProbability | kFidelity;
  std::optional<FitWindow> fit_window;
  int workers = 0;
  int spectrum_samples = 101;
  int package_width = 40;  // 0: fit
  int fidelity_cells = 100;
  std::vector<double> fidelity_betas;
  bool boundary_explicit = false;

  [[nodiscard]] QuenchProtocol protocol_at(double beta) const { return {protocol, beta, sudden_j1, sudden_j2}; }
  [[nodiscard]] InitialState resolved_initial() const {
    InitialState init = initial;
    const bool bulk = init.kind == InitialKind::SSH_BULK || init.kind == InitialKind::CREUTZ_PLAQUETTE;
    if (bulk && init.cell == 0) init.cell = chain.unit_cells / 2;
    return init;
  }
};

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

inline const char* observable_name(unsigned bit) {
  switch (bit) {
    case kTransport: return "transport";
    case kReturnProbability: return "return_probability";
    case kFidelity: return "fidelity";
    default: return "?";
  }
}

inline unsigned parse_observable(const std::string& s) {
  for (unsigned bit : {kTransport, kReturnProbability, kFidelity}) {
    if (s == observable_name(bit)) return bit;
  }
  throw ConfigError("unknown observable '" + s + "'");
}

/// "1e-3,2e-3" or "log:lo:hi:count".
inline std::vector<double> parse_beta_list(const std::string& text) {
  auto number = [](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
  };
  std::vector<std::string> parts;
  std::string item;
  const bool log_form = text.rfind("log:", 0) == 0;
  std::stringstream ss(log_form ? text.substr(4) : text);
  while (std::getline(ss, item, log_form ? ':' : ',')) parts.push_back(item);
  if (log_form) {
    require(parts.size() == 3, "log beta list must be log:lo:hi:count");
    const double count = number(parts[2]);
    require(count == std::floor(count) && count >= 2, "log beta list count must be an integer >= 2");
    return log_spaced(number(parts[0]), number(parts[1]), static_cast<int>(count));
  }
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(number(p));
  require(!out.empty(), "beta list is empty");
  return out;
}

namespace detail {

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

}  // namespace detail

/// Applies a JSON document on top of `cfg`. Unknown keys are errors.
inline void apply_json(RunConfig& cfg, const json& doc) {
  using detail::check_keys;
  using detail::read;
  try {
    check_keys(doc, {"chain", "protocol", "initial", "integrator", "output", "sweep", "spectrum", "appendix"}, "config");
    if (doc.contains("chain")) {
      const json& c = doc.at("chain");
      check_keys(c, {"model", "boundary", "cells", "gamma"}, "chain");
      if (c.contains("model")) cfg.chain.model = parse_model(upper(c.at("model").get<std::string>()));
      if (c.contains("boundary")) {
        cfg.chain.boundary = parse_boundary(upper(c.at("boundary").get<std::string>()));
        cfg.boundary_explicit = true;
      }
      read(c, "cells", cfg.chain.unit_cells);
      read(c, "gamma", cfg.chain.gamma);
    }
    if (doc.contains("protocol")) {
      const json& p = doc.at("protocol");
      check_keys(p, {"kind", "beta", "betas", "sudden_j1", "sudden_j2"}, "protocol");
      if (p.contains("kind")) cfg.protocol = parse_protocol_kind(upper(p.at("kind").get<std::string>()));
      require(!(p.contains("beta") && p.contains("betas")), "give either protocol.beta or protocol.betas");
      if (p.contains("beta")) cfg.betas = {p.at("beta").get<double>()};
      if (p.contains("betas")) {
        const json& b = p.at("betas");
        cfg.betas = b.is_string() ? parse_beta_list(b.get<std::string>()) : b.get<std::vector<double>>();
      }
      read(p, "sudden_j1", cfg.sudden_j1);
      read(p, "sudden_j2", cfg.sudden_j2);
    }
    if (doc.contains("initial")) {
      const json& i = doc.at("initial");
      check_keys(i, {"kind", "cell"}, "initial");
      if (i.contains("kind")) cfg.initial.kind = parse_initial_kind(upper(i.at("kind").get<std::string>()));
      read(i, "cell", cfg.initial.cell);
    }
    if (doc.contains("integrator")) {
      const json& g = doc.at("integrator");
      check_keys(g, {"dt", "tolerance", "snapshots"}, "integrator");
      if (g.contains("dt")) {
        const json& dt = g.at("dt");
        if (dt.is_string()) {
          require(dt.get<std::string>() == "auto", "integrator.dt must be a number or \"auto\"");
          cfg.dt_auto = true;
          cfg.dt.reset();
        } else {
          cfg.dt = dt.get<double>();
          cfg.dt_auto = false;
        }
      }
      read(g, "tolerance", cfg.tolerance);
      read(g, "snapshots", cfg.snapshots);
    }
    if (doc.contains("output")) {
      const json& o = doc.at("output");
      check_keys(o, {"dir"}, "output");
      read(o, "dir", cfg.out_dir);
    }
    if (doc.contains("sweep")) {
      const json& s = doc.at("sweep");
      check_keys(s, {"observables", "fit_window", "workers"}, "sweep");
      if (s.contains("observables")) {
        cfg.observables = 0;
        for (const auto& name : s.at("observables").get<std::vector<std::string>>()) cfg.observables |= parse_observable(name);
      }
      if (s.contains("fit_window")) {
        const auto w = s.at("fit_window").get<std::vector<double>>();
        require(w.size() == 2, "sweep.fit_window must be [beta_lo, beta_hi]");
        cfg.fit_window = FitWindow{w[0], w[1]};
      }
      read(s, "workers", cfg.workers);
    }
    if (doc.contains("spectrum")) {
      const json& s = doc.at("spectrum");
      check_keys(s, {"samples"}, "spectrum");
      read(s, "samples", cfg.spectrum_samples);
    }
    if (doc.contains("appendix")) {
      const json& a = doc.at("appendix");
      check_keys(a, {"package_width", "fidelity_cells", "fidelity_betas"}, "appendix");
      if (a.contains("package_width")) {
        const json& w = a.at("package_width");
        if (w.is_string()) {
          require(w.get<std::string>() == "fit", "appendix.package_width must be an integer or \"fit\"");
          cfg.package_width = 0;
        } else {
          cfg.package_width = w.get<int>();
        }
      }
      read(a, "fidelity_cells", cfg.fidelity_cells);
      if (a.contains("fidelity_betas")) {
        const json& b = a.at("fidelity_betas");
        cfg.fidelity_betas = b.is_string() ? parse_beta_list(b.get<std::string>()) : b.get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

/// Command-line values; unset members leave the config untouched.
struct Overrides {
  std::optional<std::string> model, boundary, protocol, initial, dt, beta_list, out, fit_window;
  std::optional<int> cells, initial_cell, workers;
  std::optional<double> gamma, beta;
  std::vector<double> snapshots;
};

/// "lo,hi".
inline FitWindow parse_fit_window(const std::string& text) {
  const auto parts = parse_beta_list(text);
  require(parts.size() == 2, "fit window must be lo,hi");
  return {parts[0], parts[1]};
}

/// Environment sits between the config file and the flags.
inline void apply_environment(RunConfig& cfg, const char* out_env) {
  if (out_env && *out_env) cfg.out_dir = out_env;
}

inline void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.model) cfg.chain.model = parse_model(upper(*o.model));
  if (o.boundary) {
    cfg.chain.boundary = parse_boundary(upper(*o.boundary));
    cfg.boundary_explicit = true;
  }
  if (o.cells) cfg.chain.unit_cells = *o.cells;
  if (o.gamma) cfg.chain.gamma = *o.gamma;
  if (o.protocol) cfg.protocol = parse_protocol_kind(upper(*o.protocol));
  require(!(o.beta && o.beta_list), "give either --beta or --beta-list");
  if (o.beta) cfg.betas = {*o.beta};
  if (o.beta_list) cfg.betas = parse_beta_list(*o.beta_list);
  if (o.initial) cfg.initial.kind = parse_initial_kind(upper(*o.initial));
  if (o.initial_cell) cfg.initial.cell = *o.initial_cell;
  if (o.dt) {
    if (*o.dt == "auto") {
      cfg.dt_auto = true;
      cfg.dt.reset();
    } else {
      const auto v = parse_beta_list(*o.dt);
      require(v.size() == 1, "--dt takes one number or \"auto\"");
      cfg.dt = v.front();
      cfg.dt_auto = false;
    }
  }
  if (o.out) cfg.out_dir = *o.out;
  if (o.workers) cfg.workers = *o.workers;
  if (o.fit_window) cfg.fit_window = parse_fit_window(*o.fit_window);
  if (!o.snapshots.empty()) cfg.snapshots = o.snapshots;
}

enum class Command { EVOLVE, SWEEP, SPECTRUM, APPENDIX };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::EVOLVE: return "evolve";
    case Command::SWEEP: return "sweep";
    case Command::SPECTRUM: return "spectrum";
    case Command::APPENDIX: return "appendix";
  }
  return "?";
}

/// Sweeps and appendix scans default to a coarser step than single runs.
inline double sweep_default_dt(double gamma) { return 4.0 * default_dt(gamma); }

/// Fills command-dependent defaults: the step size, and OPEN_ODD for appendix runs.
inline void resolve(RunConfig& cfg, Command command) {
  if (command == Command::APPENDIX && !cfg.boundary_explicit) cfg.chain.boundary = Boundary::OPEN_ODD;
  const bool many = command == Command::SWEEP || command == Command::APPENDIX;
  if (!cfg.dt && !cfg.dt_auto) cfg.dt = many ? sweep_default_dt(cfg.chain.gamma) : default_dt(cfg.chain.gamma);
  if (command == Command::APPENDIX && cfg.fidelity_betas.empty()) {
    const double n2 = static_cast<double>(cfg.fidelity_cells) * cfg.fidelity_cells;
    cfg.fidelity_betas = log_spaced(0.2 / n2, 4.0 / n2, 20);
  }
}

/// Checks every module precondition that can be checked before computing.
inline void validate(const RunConfig& cfg) {
  validate(cfg.chain);
  require(!cfg.betas.empty(), "at least one beta is required");
  for (std::size_t i = 0; i < cfg.betas.size(); ++i) {
    validate(cfg.chain, cfg.protocol_at(cfg.betas[i]));
    require(i == 0 || cfg.betas[i] > cfg.betas[i - 1], "beta list must be sorted ascending without repeats");
  }
  const InitialState init = cfg.resolved_initial();
  (void)initial_state(cfg.chain, init);
  if (cfg.dt) {
    IntegratorConfig ic;
    ic.dt = *cfg.dt;
    validate(ic);
  }
  require(cfg.tolerance > 0.0, "integrator.tolerance must be positive");
  for (double t : cfg.snapshots) {
    require(std::isfinite(t) && t >= 0.0, "snapshot times must be non-negative");
    for (double b : cfg.betas) require(t <= t_end(cfg.protocol_at(b)) * (1 + 1e-12), "snapshot time beyond t_end");
  }
  if (cfg.fit_window) require(cfg.fit_window->beta_lo < cfg.fit_window->beta_hi, "fit window needs lo < hi");
  require(cfg.workers >= 0, "workers must be >= 0");
  require(cfg.spectrum_samples >= 1, "spectrum.samples must be >= 1");
  require(cfg.package_width >= 0, "appendix.package_width must be >= 0");
  require(cfg.fidelity_cells >= 2, "appendix.fidelity_cells must be >= 2");
  for (double b : cfg.fidelity_betas) require(std::isfinite(b) && b > 0.0, "fidelity betas must be positive");
}

/// Canonical form of every setting that can change an output file.
inline json canonical(const RunConfig& cfg, Command command) {
  const InitialState init = cfg.resolved_initial();
  json obs = json::array();
  for (unsigned bit : {kTransport, kReturnProbability, kFidelity})
    if (cfg.observables & bit) obs.push_back(observable_name(bit));
  json doc{
      {"command", command_name(command)},
      {"chain",
       {{"model", to_string(cfg.chain.model)},
        {"boundary", to_string(cfg.chain.boundary)},
        {"cells", cfg.chain.unit_cells},
        {"gamma", cfg.chain.gamma}}},
      {"protocol",
       {{"kind", to_string(cfg.protocol)},
        {"betas", cfg.betas},
        {"sudden_j1", cfg.sudden_j1},
        {"sudden_j2", cfg.sudden_j2}}},
      {"initial", {{"kind", to_string(init.kind)}, {"cell", init.cell}}},
      {"integrator",
       {{"dt", cfg.dt_auto ? json("auto") : json(cfg.dt.value_or(0.0))},
        {"tolerance", cfg.tolerance},
        {"snapshots", cfg.snapshots}}},
      {"sweep",
       {{"observables", obs},
        {"fit_window", cfg.fit_window ? json{cfg.fit_window->beta_lo, cfg.fit_window->beta_hi} : json(nullptr)}}},
      {"spectrum", {{"samples", cfg.spectrum_samples}}},
      {"appendix",
       {{"package_width", cfg.package_width == 0 ? json("fit") : json(cfg.package_width)},
        {"fidelity_cells", cfg.fidelity_cells},
        {"fidelity_betas", cfg.fidelity_betas}}},
  };
  return doc;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg, Command command) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical(cfg, command).dump())));
  return buf;
}

}  // namespace qtransport::cli
