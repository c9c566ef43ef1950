#include "qpsr/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpsr {

ParamHamiltonian::ParamHamiltonian(std::vector<HermitianOperator> gens,
                                   std::vector<std::string> names)
    : generators(std::move(gens)), param_names(std::move(names)) {
  if (generators.empty()) {
    throw std::invalid_argument("ParamHamiltonian: needs at least one generator");
  }
  const int d0 = generators.front().dim();
  for (const auto& g : generators) {
    if (g.dim() != d0) {
      throw std::invalid_argument("ParamHamiltonian: generators have mixed dimensions");
    }
  }
  if (param_names.empty()) {
    for (size_t j = 0; j < generators.size(); ++j) {
      param_names.push_back("phi_" + std::to_string(j));
    }
  }
  if (param_names.size() != generators.size()) {
    throw std::invalid_argument("ParamHamiltonian: name count differs from generator count");
  }
}

int param_count(const Model& model) {
  return std::visit([](const auto& m) { return m.param_count(); }, model);
}

int dimension(const Model& model) {
  return std::visit([](const auto& m) { return m.dim(); }, model);
}

static void check_phi(const Model& model, const RVec& phi) {
  if (phi.size() != param_count(model)) {
    throw std::invalid_argument("parameter vector has length " +
                                std::to_string(phi.size()) + ", model expects " +
                                std::to_string(param_count(model)));
  }
}

HermitianOperator assemble(const Model& model, const RVec& phi) {
  check_phi(model, phi);
  if (const auto* lin = std::get_if<ParamHamiltonian>(&model)) {
    Mat h = Mat::Zero(lin->dim(), lin->dim());
    for (int j = 0; j < lin->param_count(); ++j) {
      h += phi[j] * lin->generators[j].matrix;
    }
    return HermitianOperator(std::move(h));
  }
  return HermitianOperator(std::cos(phi[0]) * pauli(Axis::x) +
                           std::sin(phi[0]) * pauli(Axis::z));
}

HermitianOperator deriv_generator(const Model& model, int j, const RVec& phi) {
  check_phi(model, phi);
  if (j < 0 || j >= param_count(model)) {
    throw std::invalid_argument("deriv_generator: parameter index " +
                                std::to_string(j) + " out of range");
  }
  if (const auto* lin = std::get_if<ParamHamiltonian>(&model)) {
    return lin->generators[j];
  }
  return HermitianOperator(-std::sin(phi[0]) * pauli(Axis::x) +
                           std::cos(phi[0]) * pauli(Axis::z));
}

UnitaryOperator unitary(const Model& model, double t, const RVec& phi) {
  return expm_hermitian(assemble(model, phi), t);
}

HermitianOperator exact_yj(const Model& model, double t, const RVec& phi, int j,
                           int quad_steps) {
  if (quad_steps < 2) {
    throw std::invalid_argument("exact_yj: quad_steps must be >= 2");
  }
  int points = quad_steps;
  if (points % 2 == 0) ++points;
  if (points < 3) points = 3;

  const Mat h = assemble(model, phi).matrix;
  const Mat g = deriv_generator(model, j, phi).matrix;
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Mat& v = es.eigenvectors();
  const RVec& lam = es.eigenvalues();
  const Mat w = v.adjoint() * g * v;

  // Simpson weights h/3 * (1, 4, 2, ..., 2, 4, 1); the integrand in the
  // eigenbasis is w(a,b) * exp(i s (lam_a - lam_b)).
  const double step = t / (points - 1);
  Mat acc = Mat::Zero(h.rows(), h.cols());
  for (int k = 0; k < points; ++k) {
    const double s = step * k;
    double weight = (k == 0 || k == points - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    weight *= step / 3.0;
    Vec phase(lam.size());
    for (Eigen::Index a = 0; a < lam.size(); ++a) {
      phase[a] = std::exp(Cx(0.0, s * lam[a]));
    }
    acc += weight * (phase * phase.adjoint()).cwiseProduct(w);
  }
  Mat y = v * acc * v.adjoint();
  y = ((y + y.adjoint()) / 2.0).eval();
  return HermitianOperator(std::move(y));
}

HermitianOperator closed_form_y_phi(double t, double phi) {
  const double s2t = std::sin(2.0 * t);
  const double st2 = std::sin(t) * std::sin(t);
  Mat y(2, 2);
  y << Cx(s2t * std::cos(phi), 0.0), Cx(-s2t * std::sin(phi), -2.0 * st2),
      Cx(-s2t * std::sin(phi), 2.0 * st2), Cx(-s2t * std::cos(phi), 0.0);
  y /= 2.0;
  return HermitianOperator(std::move(y));
}

EvolutionCache::EvolutionCache(const HermitianOperator& h) : EvolutionCache(h.matrix) {}

EvolutionCache::EvolutionCache(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  vecs_ = es.eigenvectors();
  vals_ = es.eigenvalues();
}

Mat EvolutionCache::unitary(double t) const {
  Vec phases(vals_.size());
  for (Eigen::Index i = 0; i < vals_.size(); ++i) {
    phases[i] = std::exp(Cx(0.0, -t * vals_[i]));
  }
  return vecs_ * phases.asDiagonal() * vecs_.adjoint();
}

Vec EvolutionCache::apply(double t, const Vec& psi) const {
  Vec z = vecs_.adjoint() * psi;
  for (Eigen::Index i = 0; i < vals_.size(); ++i) {
    z[i] *= std::exp(Cx(0.0, -t * vals_[i]));
  }
  return vecs_ * z;
}

Mat EvolutionCache::conjugate(double t, const Mat& rho) const {
  const Mat u = unitary(t);
  return u * rho * u.adjoint();
}

}  // namespace qpsr
