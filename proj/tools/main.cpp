#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace qtransport;
  using namespace qtransport::cli;

  CLI::App app{"Nonadiabatic transport in SSH-type chains"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--model", ov.model, "SSH, CREUTZ or NH_SSH");
  app.add_option("--boundary", ov.boundary, "OPEN_EVEN, OPEN_ODD or PERIODIC");
  app.add_option("--cells", ov.cells, "number of unit cells N");
  app.add_option("--gamma", ov.gamma, "non-Hermitian gain/loss");
  app.add_option("--protocol", ov.protocol, "LINEAR, SINUSOIDAL, SUDDEN, PERIODIC, CREUTZ_MK, CREUTZ_THETA, NH_LINEAR");
  app.add_option("--beta", ov.beta, "quench rate");
  app.add_option("--beta-list", ov.beta_list, "comma list or log:lo:hi:count");
  app.add_option("--initial", ov.initial, "SSH_LEFT_EDGE, SSH_BULK, CREUTZ_PLAQUETTE, CREUTZ_LEFT_EDGE");
  app.add_option("--initial-cell", ov.initial_cell, "starting cell of bulk states (default N/2)");
  app.add_option("--dt", ov.dt, "RK4 step or \"auto\"");
  app.add_option("--snapshot", ov.snapshots, "snapshot time (repeatable)");
  app.add_option("--out", ov.out, "output directory");
  app.add_option("--workers", ov.workers, "sweep worker threads (0: all cores)");
  app.add_option("--fit-window", ov.fit_window, "power-law fit window lo,hi");

  Command command = Command::EVOLVE;
  const std::pair<Command, const char*> commands[] = {
      {Command::EVOLVE, "run a single quench and write the final profile"},
      {Command::SWEEP, "run a list of beta values and fit scaling exponents"},
      {Command::SPECTRUM, "instantaneous spectrum of H(t) over the quench"},
      {Command::APPENDIX, "odd-chain mode populations, Ansatz fit, reconstruction and fidelity"},
  };
  for (const auto& [cmd, help] : commands) {
    app.add_subcommand(command_name(cmd), help)->callback([&command, c = cmd] { command = c; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_json(cfg, read_json_file(config_path));
    apply_environment(cfg, std::getenv("QTRANSPORT_OUT"));
    apply_overrides(cfg, ov);
    resolve(cfg, command);
    validate(cfg);
    if (cfg.out_dir.empty()) cfg.out_dir = "qtransport-out";

    const CommandResult res = run_command(command, cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    res.files.commit(cfg.out_dir);
    for (const auto& [name, content] : res.files.files()) std::cout << cfg.out_dir << '/' << name << '\n';
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
