#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpsr/derivatives.hpp"
#include "qpsr/qcore.hpp"

namespace qpsr {

enum class FisherKind { quantum, classical };

/// d x d information matrix. Construction enforces symmetry within
/// tol::fisher_sym and positive semidefiniteness within tol::fisher_psd.
struct FisherMatrix {
  RMat entries;
  FisherKind kind = FisherKind::quantum;
  double cutoff = 0.0;  // spectral cutoff / probability floor used to build it

  FisherMatrix(RMat m, FisherKind k, double cut = 0.0);
  int dim() const { return static_cast<int>(entries.rows()); }
};

/// Pure-state Fisher matrix
///   Q_kl = 4 Re[ <d_k psi | d_l psi> - <d_k psi | psi><psi | d_l psi> ].
FisherMatrix qfim_pure(const StateVector& psi, const std::vector<Vec>& dpsis);

/// Same matrix assembled from raw shift-rule sums: each sum is normalized by
/// t / (2 N sin(t mu)) and fed through qfim_pure. All sums must carry the
/// given (t, mu, samples) metadata; seeds may differ per parameter.
FisherMatrix qfim_pure_from_raw(const StateVector& psi, const std::vector<PsiSum>& sums,
                                double t, double mu, int samples);

/// Mixed-state Fisher matrix over the spectral decomposition of rho,
/// restricted to eigenvalue pairs with p_a + p_b > cutoff.
FisherMatrix qfim_mixed(const DensityMatrix& rho, const std::vector<Mat>& drhos,
                        double cutoff = tol::eig_cutoff);

/// Symmetric logarithmic derivative: <a|L|b> = 2 <a|drho|b> / (p_a + p_b) on
/// the supported pairs, zero elsewhere. Satisfies 2 drho = L rho + rho L on
/// the support.
HermitianOperator sld(const DensityMatrix& rho, const Mat& drho,
                      double cutoff = tol::eig_cutoff);

/// Classical Fisher matrix of a discrete outcome distribution:
///   F_kl = sum_x dp_k(x) dp_l(x) / max(p(x), floor).
FisherMatrix cfim(const RVec& probs, const std::vector<RVec>& dprobs,
                  double floor = tol::prob_floor);

/// Total-variance bound tr[F^{-1}] / repetitions. An ill-conditioned or
/// singular matrix is reported as unbounded together with the flattest
/// direction instead of returning garbage.
struct CrbResult {
  double value = 0.0;
  bool bounded = true;
  RVec null_direction;
};

CrbResult crb(const FisherMatrix& f, int repetitions = 1);

/// {kind, d, entries(row-major), cutoff, metadata}.
nlohmann::json fisher_to_json(const FisherMatrix& f,
                              const std::map<std::string, std::string>& metadata = {});
FisherMatrix fisher_from_json(const nlohmann::json& j);

}  // namespace qpsr
