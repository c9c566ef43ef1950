#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpsr/config.hpp"
#include "qpsr/derivatives.hpp"
#include "qpsr/fisher.hpp"
#include "qpsr/hamiltonian.hpp"

namespace qpsr {

/// Fully resolved settings of one experiment run. Built from defaults per
/// experiment id, optionally overridden by a flat config file and CLI flags.
struct ExperimentConfig {
  std::string experiment;              // fig2 | fig3a | fig3b | fig4 | custom
  std::vector<double> t_grid;
  std::vector<double> phi_values;
  std::vector<double> gamma_values;
  int qubits = 1;
  int samples = 1000;                  // N per stochastic estimate
  double mu = 0.78539816339744830962;  // pi/4
  std::uint64_t seed = 42;
  std::vector<std::string> methods;
  std::string output_path;             // empty: derived from experiment + format
  std::string format = "csv";
  int trotter_m = 5;
  int batches = 10;                    // independent-seed batches per point
  int p_min = 2;
  int p_max = 20;
  int repetitions = 10;
  double eps = 1e-5;
  double quench_time = 1.0;
  int quad_steps = 2001;
  int threads = 1;
  std::vector<std::string> generators;  // custom model, see model_from_specs

  static ExperimentConfig defaults(const std::string& experiment);
  /// Applies overrides from a parsed config; unknown keys are rejected with
  /// a field-level diagnostic. experiment_override wins over the file.
  static ExperimentConfig from_flat(const FlatConfig& flat,
                                    const std::string& experiment_override);
  void validate() const;
  /// Canonical dump of the physics and sampling fields. Presentation options
  /// (output path, format, thread count) are excluded so the hash is stable
  /// across relocations and worker counts.
  FlatConfig to_flat() const;
  std::string resolved_output_path() const;
};

std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RunRow {
  std::string experiment;
  double t;
  double phi;
  double gamma;
  int p = -1;
  std::string method;
  double value = 0.0;
  double stat_err = 0.0;
};

struct CurveMse {
  std::string method;
  double phi;
  double gamma;
  double value;
};

struct RunRecord {
  std::string experiment;
  std::uint64_t hash = 0;
  std::vector<RunRow> rows;
  std::map<std::string, double> method_mse;   // pooled over curves
  std::vector<CurveMse> curve_mse;
};

/// (1/M) sum_i (y_i - f_i)^2.
double mse(std::span<const double> series, std::span<const double> reference);

/// 4 sin^2(t) (1 - cos^2(t) sin^2(phi)), the exact single-field QFI.
double single_field_qfi(double t, double phi);

RunRecord run_fig2(const ExperimentConfig& cfg);
RunRecord run_fig3(const ExperimentConfig& cfg);   // fig3a and fig3b
RunRecord run_fig4(const ExperimentConfig& cfg);
RunRecord run_custom(const ExperimentConfig& cfg);
RunRecord run_experiment(const ExperimentConfig& cfg);

/// Generator specs: "collective:x|y|z", "pauli:x|y|z:<qubit>", or
/// "projector:re,im;re,im;..." (amplitudes, normalized internally).
Model model_from_specs(const std::vector<std::string>& specs, int qubits);

std::string to_csv(const RunRecord& record, const ExperimentConfig& cfg);
nlohmann::json run_metadata(const RunRecord& record, const ExperimentConfig& cfg);
/// Writes the CSV plus a .meta.json sidecar, or a single all-in-one JSON
/// when format = json. Returns the primary output path.
std::string write_outputs(const RunRecord& record, const ExperimentConfig& cfg);

std::string version_string();

}  // namespace qpsr
