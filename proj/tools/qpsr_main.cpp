#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qpsr/config.hpp"
#include "qpsr/errors.hpp"
#include "qpsr/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

struct RunOptions {
  std::string experiment;
  std::string config_path;
  std::string out_path;
  std::string format;
  std::int64_t seed = -1;
  int threads = 0;
};

qpsr::ExperimentConfig build_config(const RunOptions& opt) {
  qpsr::ExperimentConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = qpsr::ExperimentConfig::from_flat(qpsr::FlatConfig::parse_file(opt.config_path),
                                            opt.experiment);
  } else {
    if (opt.experiment.empty()) {
      throw std::invalid_argument("either --experiment or --config is required");
    }
    cfg = qpsr::ExperimentConfig::defaults(opt.experiment);
  }
  if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);
  if (!opt.out_path.empty()) cfg.output_path = opt.out_path;
  if (!opt.format.empty()) cfg.format = opt.format;
  if (opt.threads > 0) cfg.threads = opt.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpsr: shift-rule derivative estimators, Fisher information and "
               "Cramer-Rao bounds for few-qubit probes"};
  app.require_subcommand(1);

  RunOptions opt;

  CLI::App* run = app.add_subcommand("run", "run an experiment and write CSV/JSON data");
  run->add_option("--experiment", opt.experiment,
                  "experiment id: fig2|fig3a|fig3b|fig4|custom");
  run->add_option("--config", opt.config_path, "flat key = value config file");
  run->add_option("--seed", opt.seed, "override the config seed");
  run->add_option("--out", opt.out_path, "output path");
  run->add_option("--format", opt.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_option("--threads", opt.threads, "worker threads (output is identical)");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config file");
  validate->add_option("--config", validate_path, "flat key = value config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      const qpsr::ExperimentConfig cfg = build_config(opt);
      const qpsr::RunRecord record = qpsr::run_experiment(cfg);
      const std::string path = qpsr::write_outputs(record, cfg);
      std::cout << "wrote " << path << " (" << record.rows.size() << " rows)\n";
      for (const auto& [method, value] : record.method_mse) {
        std::cout << "mse[" << method << "] = " << value << '\n';
      }
      return kExitOk;
    }
    const qpsr::FlatConfig flat = qpsr::FlatConfig::parse_file(validate_path);
    const qpsr::ExperimentConfig cfg = qpsr::ExperimentConfig::from_flat(flat, "");
    cfg.validate();
    std::cout << "config ok: experiment=" << cfg.experiment << ", output="
              << cfg.resolved_output_path() << "\n" << cfg.to_flat().canonical();
    return kExitOk;
  } catch (const qpsr::numerical_guard_error& e) {
    std::cerr << "numerical guard: " << e.what() << '\n';
    return kExitGuard;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
