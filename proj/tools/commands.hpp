#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace qtransport::cli {

struct CommandResult {
  OutputSet files;
  std::vector<std::string> warnings;
};

namespace detail {

inline Provenance provenance(const RunConfig& cfg, Command command, double beta) {
  Provenance p;
  p.command = command_name(command);
  p.config_hash = config_hash(cfg, command);
  p.fields = {{"model", std::string(to_string(cfg.chain.model))},
              {"boundary", std::string(to_string(cfg.chain.boundary))},
              {"cells", std::to_string(cfg.chain.unit_cells)},
              {"gamma", format_number(cfg.chain.gamma)},
              {"protocol", std::string(to_string(cfg.protocol))},
              {"initial", std::string(to_string(cfg.resolved_initial().kind))}};
  if (beta > 0.0) p.fields.emplace_back("beta", format_number(beta));
  return p;
}

inline nlohmann::json header(const RunConfig& cfg, Command command) {
  return {{"version", std::string(kVersion)},
          {"command", command_name(command)},
          {"config_hash", config_hash(cfg, command)},
          {"config", canonical(cfg, command)}};
}

inline std::string profile_csv(const DimerProfile& profile, Provenance prov) {
  prov.fields.emplace_back("offset", std::to_string(profile.offset));
  prov.fields.emplace_back("rescale_log", format_number(profile.rescale_log));
  CsvTable t({"n", "p_plus", "p_minus"});
  for (int n = 1; n <= profile.size(); ++n) t.row({double(n), profile.plus(n), profile.minus(n)});
  return t.render(prov);
}

inline double step_for(const RunConfig& cfg, const QuenchProtocol& p, const StateVector& init) {
  return cfg.dt_auto ? select_dt(cfg.chain, p, init, cfg.tolerance) : *cfg.dt;
}

}  // namespace detail

/// One quench: final profile or occupancy, summary and any snapshots.
inline CommandResult run_evolve(const RunConfig& cfg) {
  constexpr Command cmd = Command::EVOLVE;
  if (cfg.betas.size() != 1) throw ConfigError("evolve takes a single beta; use sweep for a list");
  const double beta = cfg.betas.front();
  const QuenchProtocol protocol = cfg.protocol_at(beta);
  const InitialState init = cfg.resolved_initial();
  const StateVector psi0 = initial_state(cfg.chain, init);

  IntegratorConfig ic;
  ic.dt = detail::step_for(cfg, protocol, psi0);
  ic.tolerance = cfg.tolerance;
  ic.snapshot_times = cfg.snapshots;
  const Evolution ev = evolve(cfg.chain, protocol, psi0, ic);
  if (!ev.state.amplitudes.allFinite()) throw NumericalError("evolution produced non-finite amplitudes");

  CommandResult res;
  const Provenance prov = detail::provenance(cfg, cmd, beta);
  const bool dimers = ends_on_intracell_dimers(cfg.protocol);
  const int offset = profile_offset(init);

  nlohmann::json summary = detail::header(cfg, cmd);
  summary["beta"] = beta;
  summary["dt"] = ic.dt;
  summary["steps"] = ev.steps;
  summary["log_scale"] = json_number(ev.state.log_scale);
  summary["return_probability"] = json_number(return_probability(ev.state));
  summary["fidelity"] = cfg.chain.model == Model::SSH && cfg.chain.boundary == Boundary::OPEN_ODD
                            ? json_number(adiabatic_fidelity(ev.state, cfg.chain))
                            : nlohmann::json(nullptr);
  summary["transport"] = nullptr;
  if (dimers) {
    const DimerProfile profile = dimer_profile(ev.state, cfg.chain, protocol, offset);
    res.files.add("profile.csv", detail::profile_csv(profile, prov));
    if (profile.total_plus() > 0.0) {
      const TransportSummary s = transport_summary(profile);
      summary["transport"] = {{"distance", s.distance},
                              {"width", s.width},
                              {"peak", s.peak},
                              {"peak_cell", s.peak_cell},
                              {"offset", offset},
                              {"rescale_log", profile.rescale_log},
                              {"width_definition", "standard deviation of unit-normalized p_plus about the peak cell"}};
    }
  }

  CsvTable occ({"n", "weight"});
  const auto weights = cell_occupancy(ev.state);
  for (std::size_t i = 0; i < weights.size(); ++i) occ.row({double(i + 1), weights[i]});
  res.files.add("occupancy.csv", occ.render(prov));

  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t i = 0; i < ev.snapshots.size(); ++i) {
    const StateVector& s = ev.snapshots[i];
    Provenance sp = prov;
    sp.fields.emplace_back("time", format_number(s.time));
    CsvTable t({"site", "re", "im", "log_scale"});
    for (Eigen::Index k = 0; k < s.size(); ++k) t.row({double(k), s.amplitudes[k].real(), s.amplitudes[k].imag(), s.log_scale});
    const std::string stem = "snapshot_" + std::to_string(i);
    res.files.add(stem + ".csv", t.render(sp));
    if (dimers) res.files.add(stem + "_profile.csv", detail::profile_csv(dimer_profile(s, cfg.chain, protocol, offset), sp));
    snaps.push_back({{"index", i}, {"requested", cfg.snapshots[i]}, {"time", s.time}, {"file", stem + ".csv"}});
  }
  summary["snapshots"] = snaps;
  res.files.add_json("summary.json", summary);
  return res;
}

/// A beta list: one row per beta plus power-law fits of the transport observables.
inline CommandResult run_sweep(const RunConfig& cfg) {
  constexpr Command cmd = Command::SWEEP;
  SweepOptions opt;
  opt.initial = cfg.resolved_initial();
  opt.observables = cfg.observables;
  opt.workers = cfg.workers;
  opt.sudden_j1 = cfg.sudden_j1;
  opt.sudden_j2 = cfg.sudden_j2;
  opt.dt = cfg.dt_auto ? detail::step_for(cfg, cfg.protocol_at(cfg.betas.front()), initial_state(cfg.chain, opt.initial))
                       : *cfg.dt;
  const auto rows = sweep(cfg.chain, cfg.protocol, cfg.betas, opt);

  CommandResult res;
  if (cfg.betas.size() == 1) {
    RunConfig single = cfg;
    single.dt = opt.dt;
    single.dt_auto = false;
    res = run_evolve(single);
  }

  const Provenance prov = detail::provenance(cfg, cmd, 0.0);
  CsvTable t({"beta", "distance", "width", "peak", "peak_cell", "return_probability", "fidelity", "log_scale", "steps"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    if (!std::isfinite(r.log_scale)) throw NumericalError("non-finite state at beta = " + format_number(r.beta));
    t.row({r.beta, r.distance, r.width, r.peak, double(r.peak_cell), r.return_probability, r.fidelity, r.log_scale,
           double(r.steps)});
  }
  res.files.add("sweep.csv", t.render(prov));

  nlohmann::json fits = detail::header(cfg, cmd);
  fits["dt"] = opt.dt;
  const FitWindow window = cfg.fit_window.value_or(default_fit_window(cfg.betas));
  fits["fit_window"] = {window.beta_lo, window.beta_hi};
  nlohmann::json results = nlohmann::json::object();
  auto fit_column = [&](const char* name, double SweepRow::*field, bool expect_decreasing) {
    std::vector<ScalingSample> samples;
    for (const auto& r : rows)
      if (std::isfinite(r.*field) && r.*field > 0.0) samples.push_back({r.beta, r.*field});
    std::size_t in_window = 0;
    for (const auto& s : samples) in_window += s.beta >= window.beta_lo && s.beta <= window.beta_hi;
    if (in_window < 4) {
      res.warnings.push_back(std::string("degenerate fit for ") + name + ": " + std::to_string(in_window) +
                             " point(s) in the fit window, need 4");
      results[name] = nullptr;
      return;
    }
    const ScalingFit f = fit_power_law(samples, window);
    results[name] = {{"exponent", f.exponent},
                     {"slope", f.slope},
                     {"prefactor", f.prefactor},
                     {"decreasing", f.decreasing},
                     {"r_squared", f.r_squared},
                     {"points", f.points}};
    if (f.decreasing != expect_decreasing)
      res.warnings.push_back(std::string(name) + " does not fall with beta as expected");
  };
  if ((cfg.observables & kTransport) && ends_on_intracell_dimers(cfg.protocol)) {
    fit_column("distance", &SweepRow::distance, true);
    fit_column("width", &SweepRow::width, true);
    fit_column("peak", &SweepRow::peak, false);
  } else if (cfg.observables & kTransport) {
    res.warnings.push_back(std::string(to_string(cfg.protocol)) + " does not end on intracell dimers; no transport fits");
  }
  fits["fits"] = results;
  fits["warnings"] = res.warnings;
  res.files.add_json("fits.json", fits);
  return res;
}

/// Instantaneous eigenvalues of H(t) on a uniform time grid over the quench.
inline CommandResult run_spectrum(const RunConfig& cfg) {
  constexpr Command cmd = Command::SPECTRUM;
  if (cfg.betas.size() != 1) throw ConfigError("spectrum takes a single beta");
  require(site_count(cfg.chain) <= kMaxDenseSites, "chain too large for dense diagonalization (limit " +
                                                         std::to_string(kMaxDenseSites) + " sites)");
  const double beta = cfg.betas.front();
  const QuenchProtocol protocol = cfg.protocol_at(beta);
  const double end = t_end(protocol);
  CsvTable t({"t", "beta_t", "index", "re", "im"});
  for (int i = 0; i < cfg.spectrum_samples; ++i) {
    const double time = cfg.spectrum_samples == 1 ? 0.0 : end * i / (cfg.spectrum_samples - 1);
    const auto ev = instantaneous_spectrum(cfg.chain, protocol, time);
    for (std::size_t k = 0; k < ev.size(); ++k) t.row({time, beta * time, double(k), ev[k].real(), ev[k].imag()});
  }
  CommandResult res;
  res.files.add("spectrum.csv", t.render(detail::provenance(cfg, cmd, beta)));
  return res;
}

/// Odd-chain analysis: mode populations, Ansatz fit, package reconstruction and fidelity scan.
inline CommandResult run_appendix(const RunConfig& cfg) {
  constexpr Command cmd = Command::APPENDIX;
  if (cfg.chain.model != Model::SSH || cfg.chain.boundary != Boundary::OPEN_ODD)
    throw ConfigError("appendix requires model SSH on an OPEN_ODD chain");
  if (cfg.protocol != ProtocolKind::LINEAR) throw ConfigError("appendix requires the LINEAR protocol");
  if (cfg.resolved_initial().kind != InitialKind::SSH_LEFT_EDGE)
    throw ConfigError("appendix requires the SSH_LEFT_EDGE initial state");
  if (cfg.betas.size() != 1) throw ConfigError("appendix takes a single beta");
  const int n = cfg.chain.unit_cells;
  const double beta = cfg.betas.front();
  const QuenchProtocol protocol = cfg.protocol_at(beta);
  const StateVector psi0 = initial_state(cfg.chain, cfg.resolved_initial());
  IntegratorConfig ic;
  ic.dt = detail::step_for(cfg, protocol, psi0);
  const StateVector final_state = evolve(cfg.chain, protocol, psi0, ic).state;

  CommandResult res;
  const Provenance prov = detail::provenance(cfg, cmd, beta);
  const ExtendedProjection proj = project_extended(final_state, 1.0, 0.0, n);
  const auto points = ansatz_points(proj, n);
  CsvTable modes({"j", "k", "gap", "p"});
  for (int j = n + 1; j <= 2 * n - 1; ++j) {
    const auto& pt = points[static_cast<std::size_t>(j - n - 1)];
    modes.row({double(j), std::numbers::pi * j / n, pt.gap, pt.p});
  }
  res.files.add("modes.csv", modes.render(prov));
  const AnsatzFit fit = fit_ansatz(points, beta);

  const DimerProfile exact = dimer_profile(final_state, cfg.chain, protocol, 1);
  const auto packages = traveling_packages(proj, n, beta);
  const int width = cfg.package_width > 0 ? cfg.package_width : fit_package_width(packages, exact);
  const DimerProfile rebuilt = reconstruct_profile(packages, width, exact.size());
  Provenance rp = prov;
  rp.fields.emplace_back("package_width", std::to_string(width));
  CsvTable rec({"n", "exact", "reconstructed"});
  for (int c = 1; c <= exact.size(); ++c) rec.row({double(c), exact.plus(c), rebuilt.plus(c)});
  res.files.add("reconstruction.csv", rec.render(rp));

  SweepOptions opt;
  opt.observables = kFidelity;
  opt.dt = ic.dt;
  opt.workers = cfg.workers;
  const ChainSpec fid_chain{Model::SSH, cfg.fidelity_cells, Boundary::OPEN_ODD, 0.0};
  const auto rows = sweep(fid_chain, ProtocolKind::LINEAR, cfg.fidelity_betas, opt);
  Provenance fp = prov;
  fp.fields.emplace_back("fidelity_cells", std::to_string(cfg.fidelity_cells));
  CsvTable fid({"beta", "n2_beta", "fidelity", "formula"});
  double worst = 0.0;
  const double n2 = static_cast<double>(cfg.fidelity_cells) * cfg.fidelity_cells;
  for (const auto& r : rows) {
    const double formula = fidelity_formula(cfg.fidelity_cells, r.beta);
    worst = std::max(worst, std::abs(r.fidelity - formula));
    fid.row({r.beta, n2 * r.beta, r.fidelity, formula});
  }
  res.files.add("fidelity.csv", fid.render(fp));

  nlohmann::json summary = detail::header(cfg, cmd);
  summary["dt"] = ic.dt;
  summary["ansatz"] = {{"c1", fit.c1},
                       {"c2", fit.c2},
                       {"c3", fit.c3},
                       {"peak_x", fit.peak_x},
                       {"rms_residual", fit.rms_residual},
                       {"iterations", fit.iterations},
                       {"points", fit.points}};
  summary["reconstruction"] = {{"package_width", width},
                               {"l1", normalized_l1_distance(rebuilt.p_plus, exact.p_plus)},
                               {"packages", packages.size()}};
  summary["fidelity"] = {{"cells", cfg.fidelity_cells}, {"max_formula_deviation", worst}};
  res.files.add_json("summary.json", summary);
  return res;
}

inline CommandResult run_command(Command command, const RunConfig& cfg) {
  switch (command) {
    case Command::EVOLVE: return run_evolve(cfg);
    case Command::SWEEP: return run_sweep(cfg);
    case Command::SPECTRUM: return run_spectrum(cfg);
    case Command::APPENDIX: return run_appendix(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace qtransport::cli
