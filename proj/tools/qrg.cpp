// qrg: data generator for the renormalized block concurrence of the
// transverse-field Ising chain.
//
//   qrg curve    --steps 0..10 --grid 0.5:1.5:2001 --out curve.csv
//   qrg deriv    --steps 0..10 --out deriv.csv
//   qrg scaling  --steps 2..10 --out scaling.csv      (+ scaling.json)
//   qrg collapse --steps 6,8,10 --out collapse.csv    (+ collapse.json)
//   qrg oracle   --sizes 4,8,12 --fields 0,0.2,1,3 --out oracle.csv

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qrg/cli.hpp"

namespace {

struct FlagValues {
  std::string steps;
  std::string grid = "0.5:1.5:2001";
  double j = 1.0;
  std::string out;
  std::string summary;
  std::string format = "csv";
  std::string sizes = "4,8,12";
  std::string fields = "0,0.2,1,3";
  std::string config;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, FlagValues& flags,
                      bool oracle) {
  auto* sub = app.add_subcommand(name, help);
  sub->add_option("--out", flags.out, "Output path (default: stdout)");
  sub->add_option("--format", flags.format, "csv or json")->capture_default_str();
  sub->add_option("--J", flags.j, "Exchange energy J")->capture_default_str();
  sub->add_option("--config", flags.config, "JSON file whose keys override the flags");
  if (oracle) {
    sub->add_option("--sizes", flags.sizes, "Even chain lengths, comma separated (<= 12)")->capture_default_str();
    sub->add_option("--fields", flags.fields, "Field ratios g, comma separated")->capture_default_str();
  } else {
    sub->add_option("--steps", flags.steps, "RG steps as a..b or a,b,c (default: " +
                                                qrg::cli::default_steps(name) + ")");
    sub->add_option("--grid", flags.grid, "Bare-field grid lo:hi:count (also the minimum search bracket)")
        ->capture_default_str();
  }
  if (name == "scaling" || name == "collapse")
    sub->add_option("--summary", flags.summary, "JSON summary path (default: --out with .json extension)");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = qrg::cli;

  CLI::App app{"Block renormalization of concurrence in the transverse-field Ising chain"};
  app.require_subcommand(1);
  FlagValues flags;
  add_command(app, "curve", "Concurrence C_n(g) for each RG step", flags, false);
  add_command(app, "deriv", "Derivative dC_n/dg for each RG step", flags, false);
  add_command(app, "scaling", "Minimum position/depth of dC/dg and their power-law fits", flags, false);
  add_command(app, "collapse", "Finite-size data collapse of dC/dg", flags, false);
  add_command(app, "oracle", "Exact diagonalization vs Jordan-Wigner energies", flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kConfigError;
  }

  cli::RunConfig cfg;
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.steps = cli::parse_steps(flags.steps.empty() ? cli::default_steps(cfg.command) : flags.steps);
    cfg.grid = cli::parse_grid(flags.grid);
    cfg.j = flags.j;
    cfg.out = flags.out;
    cfg.summary = flags.summary;
    cfg.format = cli::parse_format(flags.format);
    cfg.sizes = cli::parse_sizes(flags.sizes);
    cfg.fields = cli::parse_fields(flags.fields);
    if (!flags.config.empty()) cli::load_config_file(cfg, flags.config);
    cli::validate(cfg);
  } catch (const cli::IoError& e) {
    std::cerr << "qrg: " << e.what() << '\n';
    return cli::kIoError;
  } catch (const std::exception& e) {
    std::cerr << "qrg: " << e.what() << '\n';
    return cli::kConfigError;
  }

  cli::CommandOutput result;
  try {
    result = cli::run(cfg);
  } catch (const cli::ConfigError& e) {
    std::cerr << "qrg: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::logic_error& e) {
    // Invalid arguments reaching the library (bad bracket, bad step, ...).
    std::cerr << "qrg: " << e.what() << '\n';
    return cli::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "qrg: " << e.what() << '\n';
    return cli::kValidationFailure;
  }

  try {
    cli::emit(cfg, result, std::cout, std::cerr);
  } catch (const cli::IoError& e) {
    std::cerr << "qrg: " << e.what() << '\n';
    return cli::kIoError;
  }
  if (result.status != cli::kOk) std::cerr << "qrg: " << result.message << '\n';
  return result.status;
}
