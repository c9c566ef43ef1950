#include "qpsr/derivatives.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace qpsr {

std::string to_string(DerivMethod method) {
  switch (method) {
    case DerivMethod::stoc: return "stoc";
    case DerivMethod::stand: return "stand";
    case DerivMethod::fd: return "fd";
    default: return "exact";
  }
}

DerivMethod deriv_method_from_string(const std::string& name) {
  if (name == "stoc") return DerivMethod::stoc;
  if (name == "stand") return DerivMethod::stand;
  if (name == "fd") return DerivMethod::fd;
  if (name == "exact") return DerivMethod::exact;
  throw std::invalid_argument("unknown derivative method '" + name + "'");
}

static void validate_common(const StocConfig& cfg) {
  if (cfg.samples < 1) {
    throw std::invalid_argument("StocConfig: sample count must be >= 1");
  }
  if (!std::isfinite(cfg.mu) || !std::isfinite(cfg.t)) {
    throw std::invalid_argument("StocConfig: t and mu must be finite");
  }
}

void validate_mixed(const StocConfig& cfg) {
  validate_common(cfg);
  if (std::abs(std::sin(2.0 * cfg.t * cfg.mu)) <= tol::sin_guard) {
    throw numerical_guard_error(
        "StocConfig: t*mu is a multiple of pi/2, sin(2 t mu) vanishes (t=" +
        std::to_string(cfg.t) + ", mu=" + std::to_string(cfg.mu) + ")");
  }
}

void validate_pure(const StocConfig& cfg) {
  validate_common(cfg);
  if (std::abs(std::sin(cfg.t * cfg.mu)) <= tol::sin_guard) {
    throw numerical_guard_error(
        "StocConfig: t*mu is a multiple of pi, sin(t mu) vanishes (t=" +
        std::to_string(cfg.t) + ", mu=" + std::to_string(cfg.mu) + ")");
  }
}

const Mat& DerivativeEstimate::matrix() const {
  if (!is_matrix()) throw std::invalid_argument("DerivativeEstimate holds a vector");
  return std::get<Mat>(value);
}

const Vec& DerivativeEstimate::vector() const {
  if (is_matrix()) throw std::invalid_argument("DerivativeEstimate holds a matrix");
  return std::get<Vec>(value);
}

std::pair<std::vector<PauliTerm>, double> involutory_terms(const Mat& generator) {
  if (generator.rows() != generator.cols()) {
    throw std::invalid_argument("involutory_terms: generator is not square");
  }
  const Eigen::Index dim = generator.rows();
  const double scale = std::max(1.0, generator.cwiseAbs().maxCoeff());
  const double id_coeff = generator.trace().real() / static_cast<double>(dim);

  const Mat id = Mat::Identity(dim, dim);
  if ((generator * generator - id).cwiseAbs().maxCoeff() <= tol::involution) {
    return {{PauliTerm{1.0, generator}}, 0.0};
  }

  const int n = detail::qubit_count(dim);
  std::vector<PauliTerm> terms;
  Mat recon = id_coeff * id;
  const std::uint64_t words = std::uint64_t{1} << (2 * n);
  for (std::uint64_t w = 1; w < words; ++w) {
    Mat word = Mat::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
      const int digit = static_cast<int>((w >> (2 * q)) & 3);
      const Mat factor =
          digit == 0 ? Mat(Mat::Identity(2, 2)) : pauli(static_cast<Axis>(digit - 1));
      word = kron(word, factor);
    }
    const Cx overlap = (word * generator).trace() / static_cast<double>(dim);
    if (std::abs(overlap.imag()) > 1e-10 * scale) {
      throw std::invalid_argument("involutory_terms: generator is not Hermitian");
    }
    const double coeff = overlap.real();
    if (std::abs(coeff) > 1e-12 * scale) {
      recon += coeff * word;
      terms.push_back(PauliTerm{coeff, std::move(word)});
    }
  }
  const double residual = (recon - generator).cwiseAbs().maxCoeff();
  if (residual > 1e-10 * scale) {
    throw std::invalid_argument(
        "involutory_terms: Pauli-word expansion failed, residual " +
        std::to_string(residual));
  }
  return {std::move(terms), id_coeff};
}

Mat shift_commutator(const HermitianOperator& o, const DensityMatrix& rho, double theta) {
  if (o.dim() != rho.dim()) {
    throw std::invalid_argument("shift_commutator: operator and state dimensions differ");
  }
  const Eigen::Index dim = o.dim();
  const Mat id = Mat::Identity(dim, dim);
  const double invol = (o.matrix * o.matrix - id).cwiseAbs().maxCoeff();
  if (invol > tol::involution) {
    throw std::invalid_argument("shift_commutator: O^2 - I residual " +
                                std::to_string(invol) + ", identity does not hold");
  }
  const double s2 = std::sin(2.0 * theta);
  if (std::abs(s2) <= tol::sin_guard) {
    throw numerical_guard_error("shift_commutator: sin(2 theta) vanishes at theta=" +
                                std::to_string(theta));
  }
  // O^2 = I makes the exponentials analytic.
  const Mat gate_m = std::cos(theta) * id - Cx(0, 1) * std::sin(theta) * o.matrix;
  const Mat gate_p = std::cos(theta) * id + Cx(0, 1) * std::sin(theta) * o.matrix;
  const Mat fwd = gate_m * rho.matrix * gate_p;
  const Mat bwd = gate_p * rho.matrix * gate_m;
  return (Cx(0, 1) / s2) * (fwd - bwd);
}

namespace {

// Shift gates e^{+-i t mu P} for one involutory term, precomputed per call.
struct ShiftGates {
  double coeff = 0.0;
  Mat plus;   // e^{+i t mu P}
  Mat minus;  // e^{-i t mu P}
};

std::vector<ShiftGates> make_gates(const std::vector<PauliTerm>& terms, double angle,
                                   Eigen::Index dim) {
  const Mat id = Mat::Identity(dim, dim);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<ShiftGates> gates;
  gates.reserve(terms.size());
  for (const auto& term : terms) {
    ShiftGates g;
    g.coeff = term.coeff;
    g.plus = c * id + Cx(0, 1) * s * term.op;   // e^{+i t mu P}
    g.minus = c * id - Cx(0, 1) * s * term.op;  // e^{-i t mu P}
    gates.push_back(std::move(g));
  }
  return gates;
}

double sample_time(const StocConfig& cfg, int n) {
  return cfg.t * Rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(n))).uniform();
}

}  // namespace

DerivativeEstimate stoc_psr_mixed(const Model& model, const DensityMatrix& rho0, int j,
                                  const RVec& phi, const StocConfig& cfg,
                                  const KrausChannel* channel) {
  validate_mixed(cfg);
  if (rho0.dim() != dimension(model)) {
    throw std::invalid_argument("stoc_psr_mixed: state and model dimensions differ");
  }
  const double t = cfg.t;
  const EvolutionCache cache(assemble(model, phi).matrix);
  const auto [terms, id_coeff] = involutory_terms(deriv_generator(model, j, phi).matrix);
  (void)id_coeff;  // commutes with rho0, contributes nothing
  const auto gates = make_gates(terms, t * cfg.mu, rho0.dim());

  std::optional<detail::EmbeddedChannel> embedded;
  if (channel) embedded.emplace(*channel, rho0.qubits);

  Mat acc = Mat::Zero(rho0.dim(), rho0.dim());
  for (int n = 0; n < cfg.samples; ++n) {
    const double s = sample_time(cfg, n);
    const Mat us = cache.unitary(s);
    const Mat uts = cache.unitary(t - s);
    for (const auto& gate : gates) {
      const Mat up = uts * (gate.minus * us);
      const Mat um = uts * (gate.plus * us);
      Mat rho_p = up * rho0.matrix * up.adjoint();
      Mat rho_m = um * rho0.matrix * um.adjoint();
      if (embedded) {
        rho_p = embedded->apply(rho_p);
        rho_m = embedded->apply(rho_m);
      }
      acc.noalias() += gate.coeff * (rho_p - rho_m);
    }
  }
  const double prefactor = t / (cfg.samples * std::sin(2.0 * t * cfg.mu));
  return DerivativeEstimate{Mat(prefactor * acc), DerivMethod::stoc, cfg.samples,
                            cfg.mu, cfg.seed};
}

PureStocResult stoc_psr_pure(const Model& model, const StateVector& psi0, int j,
                             const RVec& phi, const StocConfig& cfg) {
  validate_pure(cfg);
  if (psi0.dim() != dimension(model)) {
    throw std::invalid_argument("stoc_psr_pure: state and model dimensions differ");
  }
  const double t = cfg.t;
  const EvolutionCache cache(assemble(model, phi).matrix);
  const Mat gen = deriv_generator(model, j, phi).matrix;
  const auto [terms, id_coeff] = involutory_terms(gen);
  const bool decomposed = terms.size() != 1 || terms.front().coeff != 1.0 ||
                          (terms.front().op - gen).cwiseAbs().maxCoeff() > 0.0;
  const auto gates = make_gates(terms, t * cfg.mu, psi0.dim());

  Vec acc = Vec::Zero(psi0.dim());
  for (int n = 0; n < cfg.samples; ++n) {
    const double s = sample_time(cfg, n);
    const Vec mid = cache.apply(s, psi0.amplitudes);
    for (const auto& gate : gates) {
      const Vec psi_p = cache.apply(t - s, Vec(gate.minus * mid));
      const Vec psi_m = cache.apply(t - s, Vec(gate.plus * mid));
      acc += gate.coeff * (psi_p - psi_m);
    }
  }
  const double prefactor = t / (2.0 * cfg.samples * std::sin(t * cfg.mu));
  Vec estimate = prefactor * acc;
  if (decomposed && id_coeff != 0.0) {
    // The dropped identity component of dH/dphi_j contributes the exact
    // phase term -i c_I t |psi(phi)>.
    estimate += Cx(0.0, -id_coeff * t) * cache.apply(t, psi0.amplitudes);
  }
  PsiSum sum{std::move(acc), t, cfg.mu, cfg.samples, cfg.seed};
  return PureStocResult{
      DerivativeEstimate{std::move(estimate), DerivMethod::stoc, cfg.samples, cfg.mu,
                         cfg.seed},
      std::move(sum)};
}

Mat trotter_unitary(double x, double z, int m) {
  if (m < 1) throw std::invalid_argument("trotter_unitary: m must be >= 1");
  const Mat rx = std::cos(x / 2.0) * Mat::Identity(2, 2) -
                 Cx(0, 1) * std::sin(x / 2.0) * pauli(Axis::x);
  const Mat rz = std::cos(z / 2.0) * Mat::Identity(2, 2) -
                 Cx(0, 1) * std::sin(z / 2.0) * pauli(Axis::z);
  const Mat step = rx * rz;
  Mat u = Mat::Identity(2, 2);
  for (int k = 0; k < m; ++k) u = step * u;
  return u;
}

DerivativeEstimate stand_psr_trotter(const StateVector& psi0, double phi, double t,
                                     int m) {
  if (m < 1 || m % 4 != 1) {
    throw std::invalid_argument(
        "stand_psr_trotter: m must be 4k+1 so that the pi shift implements -i sigma");
  }
  if (psi0.dim() != 2) {
    throw std::invalid_argument("stand_psr_trotter: single-qubit probe expected");
  }
  const double pi = 3.14159265358979323846;
  const double x = 2.0 * t * std::cos(phi) / m;
  const double z = 2.0 * t * std::sin(phi) / m;
  const Vec dx = trotter_unitary(x + pi, z, m) * psi0.amplitudes;
  const Vec dz = trotter_unitary(x, z + pi, m) * psi0.amplitudes;
  Vec dpsi = t * (-std::sin(phi) * dx + std::cos(phi) * dz);
  return DerivativeEstimate{std::move(dpsi), DerivMethod::stand, 0, 0.0, 0};
}

DerivativeEstimate finite_difference(const Model& model, const DensityMatrix& rho0,
                                     int j, const RVec& phi, double t, double eps,
                                     const KrausChannel* channel) {
  if (eps <= 0.0) throw std::invalid_argument("finite_difference: eps must be > 0");
  if (j < 0 || j >= param_count(model)) {
    throw std::invalid_argument("finite_difference: parameter index out of range");
  }
  RVec phi_p = phi;
  RVec phi_m = phi;
  phi_p[j] += eps;
  phi_m[j] -= eps;
  Mat rho_p = detail::conjugate(unitary(model, t, phi_p).matrix, rho0.matrix);
  Mat rho_m = detail::conjugate(unitary(model, t, phi_m).matrix, rho0.matrix);
  if (channel) {
    detail::EmbeddedChannel embedded(*channel, rho0.qubits);
    rho_p = embedded.apply(rho_p);
    rho_m = embedded.apply(rho_m);
  }
  return DerivativeEstimate{Mat((rho_p - rho_m) / (2.0 * eps)), DerivMethod::fd, 0, 0.0,
                            0};
}

DerivativeEstimate finite_difference(const Model& model, const StateVector& psi0,
                                     int j, const RVec& phi, double t, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("finite_difference: eps must be > 0");
  if (j < 0 || j >= param_count(model)) {
    throw std::invalid_argument("finite_difference: parameter index out of range");
  }
  RVec phi_p = phi;
  RVec phi_m = phi;
  phi_p[j] += eps;
  phi_m[j] -= eps;
  const Vec psi_p = unitary(model, t, phi_p).matrix * psi0.amplitudes;
  const Vec psi_m = unitary(model, t, phi_m).matrix * psi0.amplitudes;
  return DerivativeEstimate{Vec((psi_p - psi_m) / (2.0 * eps)), DerivMethod::fd, 0, 0.0,
                            0};
}

DerivativeEstimate exact_mixed_derivative(const Model& model, const DensityMatrix& rho0,
                                          int j, const RVec& phi, double t,
                                          int quad_steps, const KrausChannel* channel) {
  const Mat y = exact_yj(model, t, phi, j, quad_steps).matrix;
  const Mat u = unitary(model, t, phi).matrix;
  const Mat comm = y * rho0.matrix - rho0.matrix * y;
  Mat drho = Cx(0, -1) * (u * comm * u.adjoint());
  if (channel) {
    detail::EmbeddedChannel embedded(*channel, rho0.qubits);
    drho = embedded.apply(drho);
  }
  return DerivativeEstimate{std::move(drho), DerivMethod::exact, 0, 0.0, 0};
}

}  // namespace qpsr
