#pragma once

#include <string>
#include <vector>

#include "qpsr/hamiltonian.hpp"
#include "qpsr/qcore.hpp"

namespace qpsr {

/// Single-qubit Kraus channel. Operators must be 2x2 and satisfy the
/// completeness relation sum_i K_i^dag K_i = I within tol::unitarity.
struct KrausChannel {
  std::vector<Mat> operators;
  std::string label;

  KrausChannel(std::vector<Mat> ops, std::string channel_label);
};

/// Readout-time dephasing with survival probability p(t) = e^{-gamma t}:
///   K1 = diag(p(t), 1), K2 = diag(sqrt(1 - p(t)^2), 0).
KrausChannel dephasing_channel(double gamma, double t);

/// Applies the single-qubit channel to every qubit of rho in turn.
DensityMatrix apply_channel_all(const KrausChannel& channel, const DensityMatrix& rho);

/// Dephasing applied after the full unitary evolution:
///   E_all[ U(t,phi) rho0 U^dag ] with p(t) = e^{-gamma t}.
DensityMatrix noisy_evolved_state(const Model& model, const DensityMatrix& rho0,
                                  double t, const RVec& phi, double gamma);

namespace detail {

// Channel operators extended to each qubit of an n-qubit register, built once
// and reused inside sampling loops.
class EmbeddedChannel {
 public:
  EmbeddedChannel(const KrausChannel& channel, int qubits);
  Mat apply(const Mat& rho) const;

 private:
  std::vector<std::vector<Mat>> per_qubit_;  // [qubit][kraus]
};

}  // namespace detail

}  // namespace qpsr
