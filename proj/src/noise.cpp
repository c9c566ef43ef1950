#include "qpsr/noise.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpsr {

KrausChannel::KrausChannel(std::vector<Mat> ops, std::string channel_label)
    : operators(std::move(ops)), label(std::move(channel_label)) {
  if (operators.empty()) {
    throw std::invalid_argument("KrausChannel: needs at least one operator");
  }
  Mat sum = Mat::Zero(2, 2);
  for (const auto& k : operators) {
    if (k.rows() != 2 || k.cols() != 2) {
      throw std::invalid_argument("KrausChannel: operators must be 2x2 (single qubit)");
    }
    sum += k.adjoint() * k;
  }
  const double res = (sum - Mat::Identity(2, 2)).cwiseAbs().maxCoeff();
  if (res > tol::unitarity) {
    throw numerical_guard_error("KrausChannel: completeness residual " +
                                std::to_string(res));
  }
}

KrausChannel dephasing_channel(double gamma, double t) {
  if (gamma < 0.0) throw std::invalid_argument("dephasing_channel: gamma must be >= 0");
  if (t < 0.0) throw std::invalid_argument("dephasing_channel: t must be >= 0");
  const double p = std::exp(-gamma * t);
  Mat k1 = Mat::Zero(2, 2);
  k1(0, 0) = p;
  k1(1, 1) = 1.0;
  Mat k2 = Mat::Zero(2, 2);
  k2(0, 0) = std::sqrt(std::max(0.0, 1.0 - p * p));
  return KrausChannel({k1, k2}, "dephasing(gamma=" + std::to_string(gamma) + ")");
}

namespace detail {

EmbeddedChannel::EmbeddedChannel(const KrausChannel& channel, int qubits) {
  per_qubit_.resize(qubits);
  for (int q = 0; q < qubits; ++q) {
    const Eigen::Index left = Eigen::Index{1} << q;
    const Eigen::Index right = Eigen::Index{1} << (qubits - 1 - q);
    for (const auto& k : channel.operators) {
      Mat extended = kron(kron(Mat(Mat::Identity(left, left)), k),
                          Mat(Mat::Identity(right, right)));
      per_qubit_[q].push_back(std::move(extended));
    }
  }
}

Mat EmbeddedChannel::apply(const Mat& rho) const {
  Mat out = rho;
  for (const auto& ops : per_qubit_) {
    Mat next = Mat::Zero(rho.rows(), rho.cols());
    for (const auto& k : ops) {
      next.noalias() += k * out * k.adjoint();
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace detail

DensityMatrix apply_channel_all(const KrausChannel& channel, const DensityMatrix& rho) {
  detail::EmbeddedChannel embedded(channel, rho.qubits);
  return DensityMatrix(embedded.apply(rho.matrix));
}

DensityMatrix noisy_evolved_state(const Model& model, const DensityMatrix& rho0,
                                  double t, const RVec& phi, double gamma) {
  if (rho0.dim() != dimension(model)) {
    throw std::invalid_argument("noisy_evolved_state: state and model dimensions differ");
  }
  const DensityMatrix evolved = evolve(unitary(model, t, phi), rho0);
  return apply_channel_all(dephasing_channel(gamma, t), evolved);
}

}  // namespace qpsr
