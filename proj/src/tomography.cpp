#include "qpsr/tomography.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpsr {

QuenchInstance::QuenchInstance(std::vector<HermitianOperator> gens, RVec x, double time,
                               std::vector<std::pair<DensityMatrix, DensityMatrix>> state_pairs)
    : generators(std::move(gens)), true_x(std::move(x)), t(time), pairs(std::move(state_pairs)) {
  if (generators.empty()) {
    throw std::invalid_argument("QuenchInstance: needs at least one generator");
  }
  if (true_x.size() != static_cast<Eigen::Index>(generators.size())) {
    throw std::invalid_argument("QuenchInstance: coupling vector length mismatch");
  }
  if (pairs.empty()) {
    throw std::invalid_argument("QuenchInstance: needs at least one state pair");
  }
  const int dim = generators.front().dim();
  Mat h = Mat::Zero(dim, dim);
  for (int l = 0; l < d(); ++l) h += true_x[l] * generators[l].matrix;
  const Mat u = detail::expm_hermitian(h, t);
  for (const auto& [rho0, rhot] : pairs) {
    if (rho0.dim() != dim || rhot.dim() != dim) {
      throw std::invalid_argument("QuenchInstance: pair dimension mismatch");
    }
    const double res =
        (detail::conjugate(u, rho0.matrix) - rhot.matrix).cwiseAbs().maxCoeff();
    if (res > 1e-10) {
      throw std::invalid_argument(
          "QuenchInstance: evolved state inconsistent with the planted couplings, "
          "residual " + std::to_string(res));
    }
  }
}

QuenchInstance make_quench_instance(std::vector<HermitianOperator> generators,
                                    RVec true_x, double t, int p, std::uint64_t seed) {
  if (p < 1) throw std::invalid_argument("make_quench_instance: p must be >= 1");
  if (generators.empty()) {
    throw std::invalid_argument("make_quench_instance: needs generators");
  }
  const int dim = generators.front().dim();
  const int qubits = detail::qubit_count(dim);
  Mat h = Mat::Zero(dim, dim);
  for (size_t l = 0; l < generators.size(); ++l) h += true_x[l] * generators[l].matrix;
  const Mat u = detail::expm_hermitian(h, t);

  std::vector<std::pair<DensityMatrix, DensityMatrix>> pairs;
  pairs.reserve(p);
  for (int k = 0; k < p; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const StateVector psi = haar_product_state(qubits, rng);
    DensityMatrix rho0 = DensityMatrix::pure(psi);
    DensityMatrix rhot(detail::conjugate(u, rho0.matrix));
    pairs.emplace_back(std::move(rho0), std::move(rhot));
  }
  return QuenchInstance(std::move(generators), std::move(true_x), t, std::move(pairs));
}

double conservation_residual(const DensityMatrix& rho0, const DensityMatrix& rhot,
                             const HermitianOperator& h) {
  if (rho0.dim() != rhot.dim() || rho0.dim() != h.dim()) {
    throw std::invalid_argument("conservation_residual: dimension mismatch");
  }
  return ((rho0.matrix * h.matrix).trace() - (rhot.matrix * h.matrix).trace()).real();
}

QuenchMatrix build_x(const QuenchInstance& instance) {
  RMat x(instance.p(), instance.d());
  for (int k = 0; k < instance.p(); ++k) {
    for (int l = 0; l < instance.d(); ++l) {
      x(k, l) = conservation_residual(instance.pairs[k].first, instance.pairs[k].second,
                                      instance.generators[l]);
    }
  }
  return QuenchMatrix{std::move(x)};
}

CouplingSolution solve_couplings(const QuenchMatrix& x) {
  const int p = x.p();
  const int d = x.d();
  if (p < d - 1) {
    throw std::invalid_argument("solve_couplings: need at least p >= d-1 equations, got p=" +
                                std::to_string(p) + " for d=" + std::to_string(d));
  }
  Eigen::JacobiSVD<RMat> svd(x.entries, Eigen::ComputeFullV);
  const RVec& sigma = svd.singularValues();

  // Singular values padded with implicit zeros when p < d.
  RVec padded = RVec::Zero(d);
  padded.head(sigma.size()) = sigma;

  CouplingSolution solution;
  solution.x_hat = svd.matrixV().col(d - 1);
  solution.x_hat.normalize();
  Eigen::Index i_max = 0;
  solution.x_hat.cwiseAbs().maxCoeff(&i_max);
  if (solution.x_hat[i_max] < 0.0) solution.x_hat = -solution.x_hat;
  solution.residual = padded[d - 1];
  const double threshold = 1e-9 * std::max(1.0, padded[0]);
  solution.degenerate = d >= 2 && padded[d - 2] < threshold;
  return solution;
}

FisherMatrix quench_cfim(const QuenchInstance& instance, DerivMethod method,
                         const StocConfig& cfg, double eps, double x_floor) {
  if (method != DerivMethod::stoc && method != DerivMethod::fd) {
    throw std::invalid_argument("quench_cfim: method must be stoc or fd");
  }
  const int d = instance.d();
  const int p = instance.p();
  const QuenchMatrix x = build_x(instance);
  const ParamHamiltonian model(instance.generators);
  const Model as_model = model;

  // dX_{k,l}/dx_j = -tr[(d rho^(k)/dx_j) H_l]
  std::vector<RMat> dx(p, RMat::Zero(d, d));  // dx[k](l, j)
  for (int k = 0; k < p; ++k) {
    for (int j = 0; j < d; ++j) {
      Mat drho;
      if (method == DerivMethod::stoc) {
        StocConfig per = cfg;
        per.t = instance.t;
        per.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(j));
        drho = stoc_psr_mixed(as_model, instance.pairs[k].first, j, instance.true_x, per)
                   .matrix();
      } else {
        drho = finite_difference(as_model, instance.pairs[k].first, j, instance.true_x,
                                 instance.t, eps)
                   .matrix();
      }
      for (int l = 0; l < d; ++l) {
        dx[k](l, j) = -(drho * instance.generators[l].matrix).trace().real();
      }
    }
  }

  RMat f = RMat::Zero(d, d);
  int used_cells = 0;
  for (int k = 0; k < p; ++k) {
    for (int l = 0; l < d; ++l) {
      const double weight = std::abs(x.entries(k, l));
      if (weight <= x_floor) continue;
      ++used_cells;
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
          const double term = dx[k](l, i) * dx[k](l, j) / weight;
          f(i, j) += term;
          if (j != i) f(j, i) += term;
        }
      }
    }
  }
  if (used_cells == 0) {
    throw numerical_guard_error(
        "quench_cfim: every conservation cell lies below the floor, instance is "
        "uninformative");
  }
  return FisherMatrix(std::move(f), FisherKind::classical, x_floor);
}

ScalingCurves scaling_curves(const std::vector<int>& p_values, double anchor) {
  if (p_values.empty()) {
    throw std::invalid_argument("scaling_curves: p range must be non-empty");
  }
  ScalingCurves curves;
  const double p0 = static_cast<double>(p_values.front());
  for (int p : p_values) {
    curves.sql.push_back(anchor * p0 / p);
    curves.hl.push_back(anchor * p0 * p0 / (static_cast<double>(p) * p));
  }
  return curves;
}

std::vector<HermitianOperator> single_qubit_basis_projectors() {
  const double r = 1.0 / std::sqrt(2.0);
  Vec zero(2), plus(2), plus_i(2);
  zero << Cx(1, 0), Cx(0, 0);
  plus << Cx(r, 0), Cx(r, 0);
  plus_i << Cx(r, 0), Cx(0, r);
  return {projector(StateVector(zero)), projector(StateVector(plus)),
          projector(StateVector(plus_i))};
}

}  // namespace qpsr
