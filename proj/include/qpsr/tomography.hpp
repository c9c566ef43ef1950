#pragma once

#include <utility>
#include <vector>

#include "qpsr/derivatives.hpp"
#include "qpsr/fisher.hpp"
#include "qpsr/qcore.hpp"

namespace qpsr {

/// A quench experiment: unknown couplings true_x over the generators (which
/// double as the measured observables), and p pairs of initial/evolved
/// states. Construction re-checks every pair against the exact evolution.
struct QuenchInstance {
  std::vector<HermitianOperator> generators;
  RVec true_x;
  double t = 1.0;
  std::vector<std::pair<DensityMatrix, DensityMatrix>> pairs;

  QuenchInstance(std::vector<HermitianOperator> gens, RVec x, double time,
                 std::vector<std::pair<DensityMatrix, DensityMatrix>> state_pairs);
  int d() const { return static_cast<int>(generators.size()); }
  int p() const { return static_cast<int>(pairs.size()); }
};

/// Seeded instance with Haar-random pure initial states (tensor products of
/// single-qubit Haar states) evolved exactly under H = sum_l x_l H_l.
QuenchInstance make_quench_instance(std::vector<HermitianOperator> generators,
                                    RVec true_x, double t, int p, std::uint64_t seed);

/// tr[rho0 H] - tr[rhot H]; zero for an exact unitary pair generated by H.
double conservation_residual(const DensityMatrix& rho0, const DensityMatrix& rhot,
                             const HermitianOperator& h);

struct QuenchMatrix {
  RMat entries;  // p x d
  int p() const { return static_cast<int>(entries.rows()); }
  int d() const { return static_cast<int>(entries.cols()); }
};

/// X_{k,l} = tr[rho0^(k) H_l] - tr[rho^(k)(x) H_l]. Every row annihilates
/// the planted coupling vector when built from exact pairs.
QuenchMatrix build_x(const QuenchInstance& instance);

/// Null-space solve of X x = 0 by SVD. x_hat is the right-singular vector of
/// the smallest singular value, unit norm, sign fixed so the largest-magnitude
/// entry is positive. degenerate flags a (near) 2-dimensional null space.
struct CouplingSolution {
  RVec x_hat;
  double residual = 0.0;
  bool degenerate = false;
};

CouplingSolution solve_couplings(const QuenchMatrix& x);

/// Classical Fisher matrix of the quench protocol,
///   F_ij = sum over cells |X_{k,l}| > x_floor of
///          (1/|X_{k,l}|) [dX_{k,l}/dx_i] [dX_{k,l}/dx_j],
/// with dX_{k,l}/dx_j = -tr[(d rho^(k)/dx_j) H_l] estimated by the requested
/// method (stoc or fd). The stochastic path derives one seed per (pair,
/// parameter) from cfg.seed; cfg.t is overridden by the instance time.
FisherMatrix quench_cfim(const QuenchInstance& instance, DerivMethod method,
                         const StocConfig& cfg, double eps = 1e-5,
                         double x_floor = tol::x_floor);

/// 1/p and 1/p^2 reference curves anchored at the first point.
struct ScalingCurves {
  std::vector<double> sql;
  std::vector<double> hl;
};

ScalingCurves scaling_curves(const std::vector<int>& p_values, double anchor);

/// The single-qubit demo generators: projectors onto |0>, (|0>+|1>)/sqrt(2)
/// and (|0>+i|1>)/sqrt(2).
std::vector<HermitianOperator> single_qubit_basis_projectors();

}  // namespace qpsr
