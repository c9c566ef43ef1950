#pragma once

#include <string>
#include <variant>
#include <vector>

#include "qpsr/qcore.hpp"

namespace qpsr {

/// Linear model H(phi) = sum_j phi_j H_j. The generators need not commute,
/// so e^{-itH(phi)} has no per-parameter product form.
struct ParamHamiltonian {
  std::vector<HermitianOperator> generators;
  std::vector<std::string> param_names;

  explicit ParamHamiltonian(std::vector<HermitianOperator> gens,
                            std::vector<std::string> names = {});
  int param_count() const { return static_cast<int>(generators.size()); }
  int dim() const { return generators.front().dim(); }
};

/// Planar field model H(phi) = cos(phi) sigma_x + sin(phi) sigma_z with a
/// single angle parameter. Unlike the linear model its derivative generator
/// -sin(phi) sigma_x + cos(phi) sigma_z depends on phi; it is unit-norm and
/// squares to the identity.
struct FieldAngleModel {
  int param_count() const { return 1; }
  int dim() const { return 2; }
};

using Model = std::variant<ParamHamiltonian, FieldAngleModel>;

int param_count(const Model& model);
int dimension(const Model& model);

/// H(phi). phi must have length param_count(model).
HermitianOperator assemble(const Model& model, const RVec& phi);

/// dH/dphi_j at phi. Independent of phi for ParamHamiltonian.
HermitianOperator deriv_generator(const Model& model, int j, const RVec& phi);

/// e^{-i t H(phi)}. Negative t gives the inverse evolution.
UnitaryOperator unitary(const Model& model, double t, const RVec& phi);

/// Y_j = integral over s in [0,t] of e^{isH} [dH/dphi_j] e^{-isH}, by
/// composite Simpson quadrature evaluated in the eigenbasis of H.
/// quad_steps is the sample-point count and is rounded up to an odd
/// value >= 3.
HermitianOperator exact_yj(const Model& model, double t, const RVec& phi, int j,
                           int quad_steps = 2001);

/// Closed form of exact_yj for FieldAngleModel:
///   (1/2) [[sin(2t)cos(phi), -sin(2t)sin(phi) - 2i sin^2(t)],
///          [-sin(2t)sin(phi) + 2i sin^2(t), -sin(2t)cos(phi)]].
HermitianOperator closed_form_y_phi(double t, double phi);

/// Cached spectral decomposition of a fixed Hamiltonian for repeated
/// evaluation of e^{-itH} at many times. Immutable after construction.
class EvolutionCache {
 public:
  explicit EvolutionCache(const HermitianOperator& h);
  explicit EvolutionCache(const Mat& h);  // trusts hermiticity

  Mat unitary(double t) const;                   // e^{-itH}
  Vec apply(double t, const Vec& psi) const;     // e^{-itH} psi
  Mat conjugate(double t, const Mat& rho) const;  // e^{-itH} rho e^{itH}

  const RVec& eigenvalues() const { return vals_; }
  const Mat& eigenvectors() const { return vecs_; }

 private:
  Mat vecs_;
  RVec vals_;
};

}  // namespace qpsr
