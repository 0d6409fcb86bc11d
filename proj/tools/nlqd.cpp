// nlqd: command-line front end for the nonlocal nonlinear dynamics library.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nlqd/commands.hpp"

namespace {

nlqd::json read_json(const std::string& path) {
  if (path.empty()) throw nlqd::ConfigError("--config is required for this subcommand");
  std::ifstream in(path);
  if (!in) throw nlqd::ConfigError("cannot read config file " + path);
  try {
    return nlqd::json::parse(in);
  } catch (const nlqd::json::parse_error& e) {
    throw nlqd::ConfigError(path + ": invalid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = nlqd::cli;

  CLI::App app{"Nonlocal nonlinear Schrodinger dynamics on bipartite systems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = nlqd::CheckConfig{}.seed;
  std::size_t jobs = 0;
  bool dump_config = false;
  app.add_option("--config", config_path, "Experiment config (JSON)");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Random seed for the verification suite")->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--dump-config", dump_config, "Print the normalized config and exit");

  auto* evolve = app.add_subcommand("evolve", "Integrate one trajectory");
  auto* protocol = app.add_subcommand("protocol", "Run a signalling protocol");
  auto* lyapunov = app.add_subcommand("lyapunov", "Estimate the maximal Lyapunov exponent");
  double synthetic_rate = 0.0;
  auto* synthetic = lyapunov->add_option("--synthetic-rate", synthetic_rate,
                                         "Self-test: fit exp(rate t) on the run grid instead of integrating");
  auto* sweep = app.add_subcommand("sweep", "Zipped parameter sweep");
  std::vector<std::string> axis_paths;
  std::vector<std::string> axis_values;
  sweep->add_option("--axis", axis_paths, "Dotted path of a numeric config scalar (repeatable)")->allow_extra_args(false);
  sweep->add_option("--values", axis_values, "Comma-separated values for the matching --axis")->allow_extra_args(false);
  auto* verify = app.add_subcommand("verify", "Run the property verification suite");
  nlqd::CheckConfig check;
  bool controls_only = false;
  verify->add_option("--cases", check.cases, "Random cases per property")->capture_default_str();
  verify->add_option("--t-end", check.t_end, "Horizon of each check")->capture_default_str();
  verify->add_option("--tolerance-override", check.tolerance_override, "Force every tolerance (test hook)");
  verify->add_flag("--controls-only", controls_only, "Report only the sharpness controls");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kUsage;
  }

  try {
    if (verify->parsed()) {
      check.seed = seed;
      if (dump_config) {
        std::cout << nlqd::json{{"verify", check.describe()}}.dump(2) << '\n';
        return cli::kOk;
      }
      return cli::run_verify(check, std::cout, jobs, controls_only);
    }

    const nlqd::ExperimentConfig cfg = nlqd::ExperimentConfig::parse(read_json(config_path));
    if (dump_config) {
      std::cout << cfg.dump().dump(2) << '\n';
      return cli::kOk;
    }
    if (evolve->parsed()) {
      if (cfg.protocol) throw nlqd::ConfigError("protocol: evolve takes a config without a protocol block");
      return cli::run_evolve(cfg, out_dir, std::cerr);
    }
    if (protocol->parsed()) return cli::run_protocol(cfg, out_dir, jobs, std::cerr);
    if (lyapunov->parsed()) {
      if (*synthetic) return cli::run_lyapunov_synthetic(cfg, synthetic_rate, out_dir);
      return cli::run_lyapunov(cfg, out_dir, jobs);
    }
    if (sweep->parsed()) {
      if (axis_paths.size() != axis_values.size())
        throw nlqd::ConfigError("sweep: each --axis needs exactly one --values");
      std::vector<cli::SweepAxis> axes;
      for (std::size_t i = 0; i < axis_paths.size(); ++i)
        axes.push_back({axis_paths[i], cli::parse_values(axis_values[i])});
      return cli::run_sweep(cfg, axes, out_dir, jobs, std::cerr);
    }
  } catch (const nlqd::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << " at step " << e.step();
    if (e.branch() >= 0) std::cerr << " (branch " << e.branch() << ")";
    std::cerr << '\n';
    return cli::kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  }
  return cli::kUsage;
}
