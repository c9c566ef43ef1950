#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "qpsr/hamiltonian.hpp"
#include "qpsr/noise.hpp"
#include "qpsr/qcore.hpp"

namespace qpsr {

enum class DerivMethod { stoc, stand, fd, exact };

std::string to_string(DerivMethod method);
DerivMethod deriv_method_from_string(const std::string& name);

/// Sampling configuration for the stochastic shift rule. The product t*mu
/// must keep sin(2 t mu) away from zero for the mixed rule and sin(t mu)
/// away from zero for the pure rule; validate_mixed / validate_pure enforce
/// the corresponding guard.
struct StocConfig {
  int samples = 1000;        // N
  double mu = 0.78539816339744830962;  // parameter shift in radians (pi/4)
  std::uint64_t seed = 0;
  double t = 1.0;            // interaction time
};

void validate_mixed(const StocConfig& cfg);
void validate_pure(const StocConfig& cfg);

/// An estimate of d rho / d phi_j (matrix) or d |psi> / d phi_j (vector)
/// together with the sampling metadata that produced it.
struct DerivativeEstimate {
  std::variant<Mat, Vec> value;
  DerivMethod method = DerivMethod::exact;
  int samples = 0;
  double mu = 0.0;
  std::uint64_t seed = 0;

  const Mat& matrix() const;
  const Vec& vector() const;
  bool is_matrix() const { return std::holds_alternative<Mat>(value); }
};

/// Raw accumulated sum over samples of (|psi+> - |psi->), before the
/// t / (2 N sin(t mu)) normalization. Feeds qfim_pure_from_raw.
struct PsiSum {
  Vec raw;
  double t = 0.0;
  double mu = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
};

struct PureStocResult {
  DerivativeEstimate estimate;
  PsiSum sum;
};

/// One involutory term of a Hermitian generator: coeff * op with op^2 = I.
struct PauliTerm {
  double coeff;
  Mat op;
};

/// Splits a Hermitian generator into terms whose operators square to the
/// identity. If the generator itself is involutory it is returned as a
/// single unit-coefficient term; otherwise it is expanded in the Pauli-word
/// basis (dimension must be 2^n). The identity component is reported via
/// the second return value and not included in the term list, since it
/// commutes with every state.
std::pair<std::vector<PauliTerm>, double> involutory_terms(const Mat& generator);

/// (i / sin(2 theta)) [e^{-i theta O} rho e^{i theta O} -
///                     e^{i theta O} rho e^{-i theta O}],
/// which equals [O, rho] exactly whenever O^2 = I and sin(2 theta) != 0.
Mat shift_commutator(const HermitianOperator& o, const DensityMatrix& rho, double theta);

/// Stochastic shift-rule estimate of d rho(phi) / d phi_j:
///   (t / (N sin(2 t mu))) * sum_n [rho+_n - rho-_n]
/// with s drawn uniformly on [0, t] per sample and
///   U+- = e^{-i(t-s)H} e^{-+ i t mu P} e^{-isH}
/// applied per involutory term P of dH/dphi_j. If a channel is given it is
/// applied to each shifted state before subtraction. Sample n draws its
/// stream from (seed, n), so the result is independent of evaluation order
/// and bit-identical for a fixed config.
DerivativeEstimate stoc_psr_mixed(const Model& model, const DensityMatrix& rho0, int j,
                                  const RVec& phi, const StocConfig& cfg,
                                  const KrausChannel* channel = nullptr);

/// Pure-state variant: estimate = (t / (2 N sin(t mu))) * sum_n [|psi+> - |psi->],
/// plus the raw accumulated sum needed by the sampled Fisher form. Any
/// identity component of the derivative generator is restored analytically
/// as -i c_I t |psi(phi)>.
PureStocResult stoc_psr_pure(const Model& model, const StateVector& psi0, int j,
                             const RVec& phi, const StocConfig& cfg);

/// (e^{-i(x/2) sigma_x} e^{-i(z/2) sigma_z})^m.
Mat trotter_unitary(double x, double z, int m);

/// Trotterized standard shift rule for the field-angle model. With
/// x = 2t cos(phi)/m and z = 2t sin(phi)/m it returns
///   t [ -sin(phi) U(x+pi, z) + cos(phi) U(x, z+pi) ] |psi0>.
/// Requires m = 4k+1 so that U(pi, 0) = -i sigma_x.
DerivativeEstimate stand_psr_trotter(const StateVector& psi0, double phi, double t,
                                     int m = 5);

/// Central difference of the exactly evolved state at phi +- eps e_j.
DerivativeEstimate finite_difference(const Model& model, const DensityMatrix& rho0,
                                     int j, const RVec& phi, double t, double eps,
                                     const KrausChannel* channel = nullptr);
DerivativeEstimate finite_difference(const Model& model, const StateVector& psi0,
                                     int j, const RVec& phi, double t, double eps);

/// -i U(t,phi) [Y_j, rho0] U^dag(t,phi), with Y_j from quadrature. The
/// deterministic reference the sampled estimators converge to.
DerivativeEstimate exact_mixed_derivative(const Model& model, const DensityMatrix& rho0,
                                          int j, const RVec& phi, double t,
                                          int quad_steps = 2001,
                                          const KrausChannel* channel = nullptr);

}  // namespace qpsr
