#include "qpsr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "qpsr/noise.hpp"
#include "qpsr/tomography.hpp"

#ifndef QPSR_VERSION
#define QPSR_VERSION "unknown"
#endif

namespace qpsr {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(threads, count);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

double key_or_low(double x) {
  return std::isnan(x) ? -std::numeric_limits<double>::infinity() : x;
}

void sort_rows(std::vector<RunRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    return std::make_tuple(a.p, key_or_low(a.t), key_or_low(a.phi), key_or_low(a.gamma),
                           a.method) <
           std::make_tuple(b.p, key_or_low(b.t), key_or_low(b.phi), key_or_low(b.gamma),
                           b.method);
  });
}

bool has_method(const ExperimentConfig& cfg, const std::string& m) {
  return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

const std::set<std::string> kKnownKeys = {
    "experiment", "t_grid", "phi_values", "gamma", "n_qubits", "N", "mu", "seed",
    "methods", "output_path", "format", "trotter_m", "batches", "p_min", "p_max",
    "repetitions", "eps", "quench_time", "quad_steps", "threads", "generators"};

}  // namespace

std::string version_string() { return QPSR_VERSION; }

double mse(std::span<const double> series, std::span<const double> reference) {
  if (series.empty() || series.size() != reference.size()) {
    throw std::invalid_argument("mse: series must be non-empty and equal length");
  }
  double sum = 0.0;
  for (size_t i = 0; i < series.size(); ++i) {
    const double diff = series[i] - reference[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(series.size());
}

double single_field_qfi(double t, double phi) {
  const double st = std::sin(t);
  const double ct = std::cos(t);
  const double sp = std::sin(phi);
  return 4.0 * st * st * (1.0 - ct * ct * sp * sp);
}

ExperimentConfig ExperimentConfig::defaults(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "fig2") {
    for (int i = 1; i <= 31; ++i) cfg.t_grid.push_back(i / 10.0);
    cfg.phi_values = {0.0, kPi / 7.0, kPi / 4.0, kPi / 3.0};
    cfg.qubits = 1;
    cfg.methods = {"exact", "stoc", "stand"};
  } else if (experiment == "fig3a") {
    for (int i = 1; i <= 10; ++i) cfg.t_grid.push_back(3.0 * i / 10.0);
    cfg.phi_values = {kPi / 20.0, kPi / 10.0, kPi / 5.0};
    cfg.qubits = 3;
    cfg.methods = {"exact", "stoc"};
  } else if (experiment == "fig3b") {
    for (int i = 1; i <= 10; ++i) cfg.t_grid.push_back(3.0 * i / 10.0);
    cfg.phi_values = {kPi / 10.0};
    cfg.gamma_values = {0.0, 0.05, 0.1, 0.2};
    cfg.qubits = 3;
    cfg.methods = {"fd", "stoc"};
  } else if (experiment == "fig4") {
    cfg.t_grid = {1.0};
    cfg.qubits = 1;
    cfg.methods = {"stoc", "fd"};
  } else if (experiment == "custom") {
    cfg.t_grid = {1.0};
    cfg.phi_values = {0.5};
    cfg.qubits = 1;
    cfg.methods = {"exact", "stoc"};
  } else {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_flat(const FlatConfig& flat,
                                             const std::string& experiment_override) {
  for (const auto& key : flat.keys()) {
    if (!kKnownKeys.count(key)) {
      throw std::invalid_argument("config field '" + key + "': unknown key");
    }
  }
  std::string experiment = experiment_override;
  if (flat.has("experiment")) {
    const std::string from_file = flat.string("experiment");
    if (experiment.empty()) {
      experiment = from_file;
    } else if (experiment != from_file) {
      throw std::invalid_argument("config field 'experiment': file says '" + from_file +
                                  "' but the command line says '" + experiment + "'");
    }
  }
  if (experiment.empty()) {
    throw std::invalid_argument("config field 'experiment': missing");
  }
  ExperimentConfig cfg = defaults(experiment);
  if (flat.has("t_grid")) cfg.t_grid = flat.number_list("t_grid");
  if (flat.has("phi_values")) cfg.phi_values = flat.number_list("phi_values");
  if (flat.has("gamma")) cfg.gamma_values = flat.number_list("gamma");
  cfg.qubits = static_cast<int>(flat.integer_or("n_qubits", cfg.qubits));
  cfg.samples = static_cast<int>(flat.integer_or("N", cfg.samples));
  cfg.mu = flat.number_or("mu", cfg.mu);
  cfg.seed = flat.uinteger_or("seed", cfg.seed);
  if (flat.has("methods")) cfg.methods = flat.string_list("methods");
  cfg.output_path = flat.string_or("output_path", cfg.output_path);
  cfg.format = flat.string_or("format", cfg.format);
  cfg.trotter_m = static_cast<int>(flat.integer_or("trotter_m", cfg.trotter_m));
  cfg.batches = static_cast<int>(flat.integer_or("batches", cfg.batches));
  cfg.p_min = static_cast<int>(flat.integer_or("p_min", cfg.p_min));
  cfg.p_max = static_cast<int>(flat.integer_or("p_max", cfg.p_max));
  cfg.repetitions = static_cast<int>(flat.integer_or("repetitions", cfg.repetitions));
  cfg.eps = flat.number_or("eps", cfg.eps);
  cfg.quench_time = flat.number_or("quench_time", cfg.quench_time);
  cfg.quad_steps = static_cast<int>(flat.integer_or("quad_steps", cfg.quad_steps));
  cfg.threads = static_cast<int>(flat.integer_or("threads", cfg.threads));
  if (flat.has("generators")) cfg.generators = flat.string_list("generators");
  return cfg;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> kExperiments = {"fig2", "fig3a", "fig3b", "fig4",
                                                     "custom"};
  if (!kExperiments.count(experiment)) {
    throw std::invalid_argument("config field 'experiment': unknown value '" +
                                experiment + "'");
  }
  if (t_grid.empty()) throw std::invalid_argument("config field 't_grid': empty");
  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] <= 0.0) {
      throw std::invalid_argument("config field 't_grid': entries must be positive");
    }
    if (i > 0 && t_grid[i] <= t_grid[i - 1]) {
      throw std::invalid_argument("config field 't_grid': must be strictly increasing");
    }
  }
  if (samples < 1) throw std::invalid_argument("config field 'N': must be >= 1");
  if (methods.empty()) throw std::invalid_argument("config field 'methods': empty");
  if (format != "csv" && format != "json") {
    throw std::invalid_argument("config field 'format': must be csv or json");
  }
  if (qubits < 1 || qubits > 12) {
    throw std::invalid_argument("config field 'n_qubits': must be in [1, 12]");
  }
  if (batches < 1) throw std::invalid_argument("config field 'batches': must be >= 1");
  if (repetitions < 1) {
    throw std::invalid_argument("config field 'repetitions': must be >= 1");
  }
  if (eps <= 0.0) throw std::invalid_argument("config field 'eps': must be > 0");
  if (quad_steps < 2) {
    throw std::invalid_argument("config field 'quad_steps': must be >= 2");
  }
  if (threads < 1) throw std::invalid_argument("config field 'threads': must be >= 1");
  for (double g : gamma_values) {
    if (g < 0.0) throw std::invalid_argument("config field 'gamma': must be >= 0");
  }
  std::set<std::string> allowed;
  if (experiment == "fig2") {
    allowed = {"exact", "stoc", "stand"};
    if (qubits != 1) {
      throw std::invalid_argument("config field 'n_qubits': fig2 runs a 1-qubit probe");
    }
  } else if (experiment == "fig3a" || experiment == "custom") {
    allowed = {"exact", "stoc"};
  } else if (experiment == "fig3b") {
    allowed = {"fd", "stoc"};
    if (gamma_values.empty()) {
      throw std::invalid_argument("config field 'gamma': fig3b needs decay rates");
    }
  } else {
    allowed = {"stoc", "fd"};
    if (p_min < 2 || p_max < p_min) {
      throw std::invalid_argument("config field 'p_min/p_max': need 2 <= p_min <= p_max");
    }
  }
  for (const auto& m : methods) {
    if (!allowed.count(m)) {
      throw std::invalid_argument("config field 'methods': '" + m +
                                  "' is not available for " + experiment);
    }
  }
  if (experiment == "fig2" || experiment == "fig3a" || experiment == "custom") {
    if (phi_values.empty()) {
      throw std::invalid_argument("config field 'phi_values': empty");
    }
  }
}

FlatConfig ExperimentConfig::to_flat() const {
  FlatConfig flat;
  flat.set_string("experiment", experiment);
  flat.set_number_list("t_grid", t_grid);
  flat.set_number_list("phi_values", phi_values);
  flat.set_number_list("gamma", gamma_values);
  flat.set_number("n_qubits", qubits);
  flat.set_number("N", samples);
  flat.set_number("mu", mu);
  flat.set_number("seed", static_cast<double>(seed));
  flat.set_string_list("methods", methods);
  flat.set_number("trotter_m", trotter_m);
  flat.set_number("batches", batches);
  flat.set_number("p_min", p_min);
  flat.set_number("p_max", p_max);
  flat.set_number("repetitions", repetitions);
  flat.set_number("eps", eps);
  flat.set_number("quench_time", quench_time);
  flat.set_number("quad_steps", quad_steps);
  if (!generators.empty()) flat.set_string_list("generators", generators);
  return flat;
}

std::string ExperimentConfig::resolved_output_path() const {
  if (!output_path.empty()) return output_path;
  return experiment + (format == "json" ? ".json" : ".csv");
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a(cfg.to_flat().canonical());
}

Model model_from_specs(const std::vector<std::string>& specs, int qubits) {
  if (specs.empty()) {
    if (qubits != 1) {
      throw std::invalid_argument(
          "model_from_specs: the default field-angle model is single-qubit");
    }
    return FieldAngleModel{};
  }
  std::vector<HermitianOperator> gens;
  for (const auto& spec : specs) {
    const size_t colon = spec.find(':');
    const std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "collective") {
      if (rest.size() != 1) {
        throw std::invalid_argument("generator '" + spec + "': expected collective:x|y|z");
      }
      gens.push_back(collective_pauli(axis_from_char(rest[0]), qubits));
    } else if (kind == "pauli") {
      const size_t colon2 = rest.find(':');
      if (rest.empty() || colon2 == std::string::npos) {
        throw std::invalid_argument("generator '" + spec + "': expected pauli:x|y|z:<qubit>");
      }
      const Axis axis = axis_from_char(rest[0]);
      const int target = std::stoi(rest.substr(colon2 + 1));
      if (target < 0 || target >= qubits) {
        throw std::invalid_argument("generator '" + spec + "': qubit index out of range");
      }
      Mat op = Mat::Identity(1, 1);
      for (int q = 0; q < qubits; ++q) {
        op = kron(op, q == target ? pauli(axis) : Mat(Mat::Identity(2, 2)));
      }
      gens.push_back(HermitianOperator(std::move(op)));
    } else if (kind == "projector") {
      std::vector<Cx> amps;
      std::stringstream ss(rest);
      std::string pair;
      while (std::getline(ss, pair, ';')) {
        const size_t comma = pair.find(',');
        if (comma == std::string::npos) {
          throw std::invalid_argument("generator '" + spec +
                                      "': expected projector:re,im;re,im;...");
        }
        amps.emplace_back(std::stod(pair.substr(0, comma)),
                          std::stod(pair.substr(comma + 1)));
      }
      if (amps.size() != (size_t{1} << qubits)) {
        throw std::invalid_argument("generator '" + spec +
                                    "': amplitude count does not match n_qubits");
      }
      Vec psi(amps.size());
      for (size_t i = 0; i < amps.size(); ++i) psi[i] = amps[i];
      const double norm = psi.norm();
      if (norm <= 0.0) {
        throw std::invalid_argument("generator '" + spec + "': zero amplitude vector");
      }
      psi /= norm;
      gens.push_back(projector(StateVector(std::move(psi))));
    } else {
      throw std::invalid_argument("generator '" + spec + "': unknown kind '" + kind + "'");
    }
  }
  return ParamHamiltonian(std::move(gens));
}

namespace {

struct PointResult {
  std::vector<RunRow> rows;
};

// Shared batching scheme for stochastic values: mean of `batches` estimates
// with per-batch derived seeds, standard error over the batch spread.
struct Batched {
  double value = 0.0;
  double err = 0.0;
};

Batched batched(const std::vector<double>& values) {
  Batched b;
  b.value = mean_of(values);
  b.err = values.size() > 1
              ? sample_std(values) / std::sqrt(static_cast<double>(values.size()))
              : 0.0;
  return b;
}

}  // namespace

RunRecord run_fig2(const ExperimentConfig& cfg) {
  const Model model = FieldAngleModel{};
  const StateVector psi0 = ghz(1);

  struct Point {
    double t, phi;
    int index;
  };
  std::vector<Point> points;
  for (double t : cfg.t_grid) {
    for (double phi : cfg.phi_values) {
      points.push_back({t, phi, static_cast<int>(points.size())});
    }
  }

  std::vector<PointResult> results(points.size());
  parallel_for(static_cast<int>(points.size()), cfg.threads, [&](int i) {
    const Point& pt = points[i];
    const RVec phiv = RVec::Constant(1, pt.phi);
    PointResult out;
    const double exact = single_field_qfi(pt.t, pt.phi);
    if (has_method(cfg, "exact")) {
      out.rows.push_back({cfg.experiment, pt.t, pt.phi, kNan, -1, "exact", exact, 0.0});
    }
    if (has_method(cfg, "stoc")) {
      const StateVector psi_t =
          StateVector(EvolutionCache(assemble(model, phiv).matrix).apply(pt.t, psi0.amplitudes));
      std::vector<double> qs;
      qs.reserve(cfg.batches);
      for (int b = 0; b < cfg.batches; ++b) {
        StocConfig scfg{cfg.samples, cfg.mu,
                        derive_seed(cfg.seed, static_cast<std::uint64_t>(pt.index),
                                    static_cast<std::uint64_t>(b)),
                        pt.t};
        const PureStocResult r = stoc_psr_pure(model, psi0, 0, phiv, scfg);
        const FisherMatrix q =
            qfim_pure_from_raw(psi_t, {r.sum}, pt.t, cfg.mu, cfg.samples);
        qs.push_back(q.entries(0, 0));
      }
      const Batched b = batched(qs);
      out.rows.push_back({cfg.experiment, pt.t, pt.phi, kNan, -1, "stoc", b.value, b.err});
    }
    if (has_method(cfg, "stand")) {
      const DerivativeEstimate d = stand_psr_trotter(psi0, pt.phi, pt.t, cfg.trotter_m);
      const double x = 2.0 * pt.t * std::cos(pt.phi) / cfg.trotter_m;
      const double z = 2.0 * pt.t * std::sin(pt.phi) / cfg.trotter_m;
      const StateVector psi_t(trotter_unitary(x, z, cfg.trotter_m) * psi0.amplitudes);
      const FisherMatrix q = qfim_pure(psi_t, {d.vector()});
      out.rows.push_back(
          {cfg.experiment, pt.t, pt.phi, kNan, -1, "stand", q.entries(0, 0), 0.0});
    }
    results[i] = std::move(out);
  });

  RunRecord record;
  record.experiment = cfg.experiment;
  record.hash = config_hash(cfg);
  for (auto& r : results) {
    for (auto& row : r.rows) record.rows.push_back(std::move(row));
  }
  sort_rows(record.rows);

  // MSE of each sampled method against the exact curve, per phi and pooled.
  for (const std::string& method : {std::string("stoc"), std::string("stand")}) {
    if (!has_method(cfg, method)) continue;
    std::vector<double> pooled, pooled_ref;
    for (double phi : cfg.phi_values) {
      std::vector<double> series, ref;
      for (double t : cfg.t_grid) {
        for (const auto& row : record.rows) {
          if (row.method == method && row.t == t && row.phi == phi) {
            series.push_back(row.value);
            ref.push_back(single_field_qfi(t, phi));
          }
        }
      }
      if (!series.empty()) {
        record.curve_mse.push_back({method, phi, kNan, mse(series, ref)});
        pooled.insert(pooled.end(), series.begin(), series.end());
        pooled_ref.insert(pooled_ref.end(), ref.begin(), ref.end());
      }
    }
    if (!pooled.empty()) record.method_mse[method] = mse(pooled, pooled_ref);
  }
  return record;
}

RunRecord run_fig3(const ExperimentConfig& cfg) {
  const bool noisy = cfg.experiment == "fig3b";
  const int n = cfg.qubits;
  const ParamHamiltonian collective({collective_pauli(Axis::x, n),
                                     collective_pauli(Axis::y, n),
                                     collective_pauli(Axis::z, n)},
                                    {"phi_x", "phi_y", "phi_z"});
  const Model model = collective;
  const StateVector psi0 = ghz(n);
  const DensityMatrix rho0 = DensityMatrix::pure(psi0);
  const int d = 3;

  struct Point {
    double t, phi, gamma;
    int index;
  };
  std::vector<Point> points;
  for (double t : cfg.t_grid) {
    for (double phi : cfg.phi_values) {
      if (noisy) {
        for (double g : cfg.gamma_values) {
          points.push_back({t, phi, g, static_cast<int>(points.size())});
        }
      } else {
        points.push_back({t, phi, kNan, static_cast<int>(points.size())});
      }
    }
  }

  std::vector<PointResult> results(points.size());
  parallel_for(static_cast<int>(points.size()), cfg.threads, [&](int i) {
    const Point& pt = points[i];
    const RVec phiv = RVec::Constant(d, pt.phi);
    PointResult out;
    const EvolutionCache cache(assemble(model, phiv).matrix);

    if (!noisy) {
      const StateVector psi_t(cache.apply(pt.t, psi0.amplitudes));
      if (has_method(cfg, "exact")) {
        std::vector<Vec> dpsis;
        for (int j = 0; j < d; ++j) {
          const Mat y = exact_yj(model, pt.t, phiv, j, cfg.quad_steps).matrix;
          dpsis.push_back(Cx(0, -1) * cache.apply(pt.t, Vec(y * psi0.amplitudes)));
        }
        const CrbResult bound = crb(qfim_pure(psi_t, dpsis));
        out.rows.push_back(
            {cfg.experiment, pt.t, pt.phi, kNan, -1, "exact", bound.value, 0.0});
      }
      if (has_method(cfg, "stoc")) {
        std::vector<double> vals;
        for (int b = 0; b < cfg.batches; ++b) {
          std::vector<PsiSum> sums;
          for (int j = 0; j < d; ++j) {
            StocConfig scfg{cfg.samples, cfg.mu,
                            derive_seed(cfg.seed, static_cast<std::uint64_t>(pt.index),
                                        static_cast<std::uint64_t>(b),
                                        static_cast<std::uint64_t>(j)),
                            pt.t};
            sums.push_back(stoc_psr_pure(model, psi0, j, phiv, scfg).sum);
          }
          const FisherMatrix q =
              qfim_pure_from_raw(psi_t, sums, pt.t, cfg.mu, cfg.samples);
          vals.push_back(crb(q).value);
        }
        const Batched b = batched(vals);
        out.rows.push_back(
            {cfg.experiment, pt.t, pt.phi, kNan, -1, "stoc", b.value, b.err});
      }
    } else {
      const KrausChannel channel = dephasing_channel(pt.gamma, pt.t);
      const DensityMatrix rho_t = noisy_evolved_state(model, rho0, pt.t, phiv, pt.gamma);
      if (has_method(cfg, "fd")) {
        std::vector<Mat> drhos;
        for (int j = 0; j < d; ++j) {
          drhos.push_back(
              finite_difference(model, rho0, j, phiv, pt.t, cfg.eps, &channel).matrix());
        }
        const CrbResult bound = crb(qfim_mixed(rho_t, drhos));
        out.rows.push_back(
            {cfg.experiment, pt.t, pt.phi, pt.gamma, -1, "fd", bound.value, 0.0});
      }
      if (has_method(cfg, "stoc")) {
        std::vector<double> vals;
        for (int b = 0; b < cfg.batches; ++b) {
          std::vector<Mat> drhos;
          for (int j = 0; j < d; ++j) {
            StocConfig scfg{cfg.samples, cfg.mu,
                            derive_seed(cfg.seed, static_cast<std::uint64_t>(pt.index),
                                        static_cast<std::uint64_t>(b),
                                        static_cast<std::uint64_t>(j)),
                            pt.t};
            drhos.push_back(
                stoc_psr_mixed(model, rho0, j, phiv, scfg, &channel).matrix());
          }
          vals.push_back(crb(qfim_mixed(rho_t, drhos)).value);
        }
        const Batched b = batched(vals);
        out.rows.push_back(
            {cfg.experiment, pt.t, pt.phi, pt.gamma, -1, "stoc", b.value, b.err});
      }
    }
    results[i] = std::move(out);
  });

  RunRecord record;
  record.experiment = cfg.experiment;
  record.hash = config_hash(cfg);
  for (auto& r : results) {
    for (auto& row : r.rows) record.rows.push_back(std::move(row));
  }
  sort_rows(record.rows);

  // Stochastic curve MSE against the deterministic reference when present.
  const std::string reference = noisy ? "fd" : "exact";
  if (has_method(cfg, "stoc") && has_method(cfg, reference)) {
    std::vector<double> pooled, pooled_ref;
    std::vector<double> gammas = noisy ? cfg.gamma_values : std::vector<double>{kNan};
    for (double phi : cfg.phi_values) {
      for (double g : gammas) {
        std::vector<double> series, ref;
        for (double t : cfg.t_grid) {
          double sv = kNan, rv = kNan;
          for (const auto& row : record.rows) {
            const bool same_gamma =
                (std::isnan(g) && std::isnan(row.gamma)) || row.gamma == g;
            if (row.t == t && row.phi == phi && same_gamma) {
              if (row.method == "stoc") sv = row.value;
              if (row.method == reference) rv = row.value;
            }
          }
          if (!std::isnan(sv) && !std::isnan(rv)) {
            series.push_back(sv);
            ref.push_back(rv);
          }
        }
        if (!series.empty()) {
          record.curve_mse.push_back({"stoc", phi, g, mse(series, ref)});
          pooled.insert(pooled.end(), series.begin(), series.end());
          pooled_ref.insert(pooled_ref.end(), ref.begin(), ref.end());
        }
      }
    }
    if (!pooled.empty()) record.method_mse["stoc"] = mse(pooled, pooled_ref);
  }
  return record;
}

RunRecord run_fig4(const ExperimentConfig& cfg) {
  std::vector<HermitianOperator> generators;
  if (cfg.generators.empty()) {
    generators = single_qubit_basis_projectors();
  } else {
    const Model model = model_from_specs(cfg.generators, cfg.qubits);
    const auto* linear = std::get_if<ParamHamiltonian>(&model);
    if (!linear) {
      throw std::invalid_argument("config field 'generators': fig4 needs explicit generators");
    }
    generators = linear->generators;
  }
  const int d = static_cast<int>(generators.size());
  RVec true_x = RVec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));

  std::vector<int> p_values;
  for (int p = cfg.p_min; p <= cfg.p_max; ++p) p_values.push_back(p);

  struct Job {
    int p, rep, index;
  };
  std::vector<Job> jobs;
  for (int p : p_values) {
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      jobs.push_back({p, rep, static_cast<int>(jobs.size())});
    }
  }

  struct JobResult {
    double stoc = kNan;
    double fd = kNan;
  };
  std::vector<JobResult> job_results(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int i) {
    const Job& job = jobs[i];
    const QuenchInstance instance = make_quench_instance(
        generators, true_x, cfg.quench_time, job.p,
        derive_seed(cfg.seed, static_cast<std::uint64_t>(job.p),
                    static_cast<std::uint64_t>(job.rep)));
    JobResult out;
    if (has_method(cfg, "stoc")) {
      StocConfig scfg{cfg.samples, cfg.mu,
                      derive_seed(cfg.seed, static_cast<std::uint64_t>(job.p),
                                  static_cast<std::uint64_t>(job.rep), 17),
                      cfg.quench_time};
      out.stoc = crb(quench_cfim(instance, DerivMethod::stoc, scfg, cfg.eps)).value;
    }
    if (has_method(cfg, "fd")) {
      StocConfig scfg{cfg.samples, cfg.mu, 0, cfg.quench_time};
      out.fd = crb(quench_cfim(instance, DerivMethod::fd, scfg, cfg.eps)).value;
    }
    job_results[i] = out;
  });

  RunRecord record;
  record.experiment = cfg.experiment;
  record.hash = config_hash(cfg);
  std::map<std::string, std::vector<double>> means_by_method;
  for (int p : p_values) {
    for (const std::string& method : cfg.methods) {
      std::vector<double> reps;
      for (size_t i = 0; i < jobs.size(); ++i) {
        if (jobs[i].p != p) continue;
        reps.push_back(method == "stoc" ? job_results[i].stoc : job_results[i].fd);
      }
      const double mean = mean_of(reps);
      record.rows.push_back({cfg.experiment, cfg.quench_time, kNan, kNan, p, method,
                             mean, sample_std(reps)});
      means_by_method[method].push_back(mean);
    }
  }

  // Reference curves anchored at the first p of the deterministic method
  // when available, else the first configured method.
  const std::string anchor_method = has_method(cfg, "fd") ? "fd" : cfg.methods.front();
  const double anchor = means_by_method[anchor_method].front();
  const ScalingCurves curves = scaling_curves(p_values, anchor);
  for (size_t i = 0; i < p_values.size(); ++i) {
    record.rows.push_back({cfg.experiment, cfg.quench_time, kNan, kNan, p_values[i],
                           "sql", curves.sql[i], 0.0});
    record.rows.push_back({cfg.experiment, cfg.quench_time, kNan, kNan, p_values[i],
                           "hl", curves.hl[i], 0.0});
  }
  sort_rows(record.rows);
  return record;
}

RunRecord run_custom(const ExperimentConfig& cfg) {
  const Model model = model_from_specs(cfg.generators, cfg.qubits);
  const int d = param_count(model);
  const StateVector psi0 = ghz(cfg.qubits);
  if (dimension(model) != psi0.dim()) {
    throw std::invalid_argument("custom experiment: model and probe dimensions differ");
  }

  struct Point {
    double t, phi;
    int index;
  };
  std::vector<Point> points;
  for (double t : cfg.t_grid) {
    for (double phi : cfg.phi_values) {
      points.push_back({t, phi, static_cast<int>(points.size())});
    }
  }

  std::vector<PointResult> results(points.size());
  parallel_for(static_cast<int>(points.size()), cfg.threads, [&](int i) {
    const Point& pt = points[i];
    const RVec phiv = RVec::Constant(d, pt.phi);
    const EvolutionCache cache(assemble(model, phiv).matrix);
    const StateVector psi_t(cache.apply(pt.t, psi0.amplitudes));
    PointResult out;
    if (has_method(cfg, "exact")) {
      std::vector<Vec> dpsis;
      for (int j = 0; j < d; ++j) {
        const Mat y = exact_yj(model, pt.t, phiv, j, cfg.quad_steps).matrix;
        dpsis.push_back(Cx(0, -1) * cache.apply(pt.t, Vec(y * psi0.amplitudes)));
      }
      const FisherMatrix q = qfim_pure(psi_t, dpsis);
      const double value = d == 1 ? q.entries(0, 0) : crb(q).value;
      out.rows.push_back({cfg.experiment, pt.t, pt.phi, kNan, -1, "exact", value, 0.0});
    }
    if (has_method(cfg, "stoc")) {
      std::vector<double> vals;
      for (int b = 0; b < cfg.batches; ++b) {
        std::vector<PsiSum> sums;
        for (int j = 0; j < d; ++j) {
          StocConfig scfg{cfg.samples, cfg.mu,
                          derive_seed(cfg.seed, static_cast<std::uint64_t>(pt.index),
                                      static_cast<std::uint64_t>(b),
                                      static_cast<std::uint64_t>(j)),
                          pt.t};
          sums.push_back(stoc_psr_pure(model, psi0, j, phiv, scfg).sum);
        }
        const FisherMatrix q = qfim_pure_from_raw(psi_t, sums, pt.t, cfg.mu, cfg.samples);
        vals.push_back(d == 1 ? q.entries(0, 0) : crb(q).value);
      }
      const Batched b = batched(vals);
      out.rows.push_back({cfg.experiment, pt.t, pt.phi, kNan, -1, "stoc", b.value, b.err});
    }
    results[i] = std::move(out);
  });

  RunRecord record;
  record.experiment = cfg.experiment;
  record.hash = config_hash(cfg);
  for (auto& r : results) {
    for (auto& row : r.rows) record.rows.push_back(std::move(row));
  }
  sort_rows(record.rows);
  return record;
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == "fig2") return run_fig2(cfg);
  if (cfg.experiment == "fig3a" || cfg.experiment == "fig3b") return run_fig3(cfg);
  if (cfg.experiment == "fig4") return run_fig4(cfg);
  return run_custom(cfg);
}

std::string to_csv(const RunRecord& record, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "experiment,t,phi,gamma,p,method,value,stat_err,N,mu,seed\n";
  for (const auto& row : record.rows) {
    out << row.experiment << ',';
    out << (std::isnan(row.t) ? "" : fmt_g(row.t)) << ',';
    out << (std::isnan(row.phi) ? "" : fmt_g(row.phi)) << ',';
    out << (std::isnan(row.gamma) ? "" : fmt_g(row.gamma)) << ',';
    if (row.p >= 0) out << row.p;
    out << ',';
    out << row.method << ',';
    out << fmt_g(row.value) << ',';
    out << fmt_g(row.stat_err) << ',';
    out << cfg.samples << ',';
    out << fmt_g(cfg.mu) << ',';
    out << cfg.seed << '\n';
  }
  return out.str();
}

nlohmann::json run_metadata(const RunRecord& record, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = record.experiment;
  char hash_buf[24];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(record.hash));
  j["config_hash"] = hash_buf;
  j["version"] = version_string();
  j["config"] = cfg.to_flat().canonical();
  j["output_path"] = cfg.resolved_output_path();
  j["format"] = cfg.format;
  j["threads"] = cfg.threads;
  if (record.experiment == "fig3b") j["channel"] = "dephasing";
  j["rows"] = record.rows.size();
  j["mse"] = record.method_mse;
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& c : record.curve_mse) {
    nlohmann::json entry;
    entry["method"] = c.method;
    if (!std::isnan(c.phi)) entry["phi"] = c.phi;
    if (!std::isnan(c.gamma)) entry["gamma"] = c.gamma;
    entry["mse"] = c.value;
    curves.push_back(entry);
  }
  j["curve_mse"] = curves;
  return j;
}

std::string write_outputs(const RunRecord& record, const ExperimentConfig& cfg) {
  const std::string path = cfg.resolved_output_path();
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);

  if (cfg.format == "json") {
    nlohmann::json j = run_metadata(record, cfg);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : record.rows) {
      nlohmann::json entry;
      entry["experiment"] = row.experiment;
      if (!std::isnan(row.t)) entry["t"] = row.t;
      if (!std::isnan(row.phi)) entry["phi"] = row.phi;
      if (!std::isnan(row.gamma)) entry["gamma"] = row.gamma;
      if (row.p >= 0) entry["p"] = row.p;
      entry["method"] = row.method;
      entry["value"] = row.value;
      entry["stat_err"] = row.stat_err;
      entry["N"] = cfg.samples;
      entry["mu"] = cfg.mu;
      entry["seed"] = cfg.seed;
      rows.push_back(entry);
    }
    j["data"] = rows;
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write output file '" + path + "'");
    out << j.dump(2) << '\n';
    return path;
  }

  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write output file '" + path + "'");
  out << to_csv(record, cfg);
  std::ofstream meta(path + ".meta.json");
  if (!meta) throw std::invalid_argument("cannot write sidecar for '" + path + "'");
  meta << run_metadata(record, cfg).dump(2) << '\n';
  return path;
}

}  // namespace qpsr
