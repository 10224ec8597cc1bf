// nes-sim: run, tune and replicate Nash-equilibrium seeking experiments.
//
// Exit codes: 0 success, 1 configuration or runtime error, 2 the run finished
// but did not converge (or left the control bounds).

#include "nes/experiment.hpp"
#include "nes/format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<unsigned long> seed;  // only randomised utilities read it

  void apply(nes::ExperimentConfig& cfg) const {
    if (dt) cfg.sim.dt = *dt;
    if (t_end) cfg.sim.t_end = *t_end;
  }
};

int execute(nes::ExperimentConfig cfg, const Overrides& ov) {
  ov.apply(cfg);
  const nes::ExperimentResult res = nes::run_experiment(cfg);
  for (const auto& w : res.summary.warnings) std::cerr << "warning: " << w << '\n';
  if (!cfg.output.trajectory.empty())
    nes::write_csv(res.trajectory, cfg.output.trajectory);
  if (!cfg.output.summary.empty())
    nes::write_summary(res.summary, cfg.output.summary);
  nes::write_summary(res.summary, std::cout);
  return res.summary.exit_code();
}

int cmd_run(const std::string& path, const Overrides& ov) {
  return execute(nes::load_config(path), ov);
}

int cmd_tune(const std::string& path, const Overrides& ov) {
  nes::ExperimentConfig cfg = nes::load_config(path);
  ov.apply(cfg);
  std::cout << nes::format_report(nes::tune(cfg));
  return 0;
}

int cmd_oracle(const std::string& path) {
  const nes::OracleReport r = nes::oracle(nes::load_config(path));
  std::cout << "x_star=" << nes::format_list(r.x_star) << '\n'
            << "residual_inf=" << nes::format_real(r.residual) << '\n';
  return 0;
}

int cmd_replicate(const std::string& figure, const std::string& out_dir,
                  const Overrides& ov) {
  nes::ExperimentConfig cfg = nes::preset(figure);
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  cfg.output.trajectory = (dir / (figure + ".csv")).string();
  cfg.output.summary = (dir / (figure + "_summary.txt")).string();
  ov.apply(cfg);
  {
    std::ofstream doc(dir / (figure + ".json"));
    doc << nes::serialize_config(cfg);
  }
  return execute(cfg, Overrides{});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash equilibrium seeking simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  app.add_option("--dt", ov.dt, "Override the integration step")
      ->check(CLI::PositiveNumber);
  app.add_option("--t-end", ov.t_end, "Override the final time")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", ov.seed, "Seed for randomised utilities");

  std::string config_path;
  std::string figure;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Simulate an experiment document");
  run->add_option("config", config_path, "Experiment JSON")->required();
  auto* tune = app.add_subcommand("tune", "Print the gain bounds for a document");
  tune->add_option("config", config_path, "Experiment JSON")->required();
  auto* oracle = app.add_subcommand("oracle", "Print the exact equilibrium");
  oracle->add_option("config", config_path, "Experiment JSON")->required();
  auto* replicate = app.add_subcommand("replicate", "Run a built-in figure preset");
  replicate->add_option("figure", figure, "fig2, fig3 or fig4")->required();
  replicate->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*run) return cmd_run(config_path, ov);
    if (*tune) return cmd_tune(config_path, ov);
    if (*oracle) return cmd_oracle(config_path);
    if (*replicate) return cmd_replicate(figure, out_dir, ov);
  } catch (const std::exception& e) {
    std::cerr << "nes-sim: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
