#include "qpsr/fisher.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qpsr {

FisherMatrix::FisherMatrix(RMat m, FisherKind k, double cut)
    : entries(std::move(m)), kind(k), cutoff(cut) {
  if (entries.rows() != entries.cols() || entries.rows() < 1) {
    throw std::invalid_argument("FisherMatrix: matrix must be square and non-empty");
  }
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol::fisher_sym) {
    throw numerical_guard_error("FisherMatrix: asymmetry " + std::to_string(asym));
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(entries, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::fisher_psd) {
    throw numerical_guard_error("FisherMatrix: negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
}

FisherMatrix qfim_pure(const StateVector& psi, const std::vector<Vec>& dpsis) {
  if (dpsis.empty()) throw std::invalid_argument("qfim_pure: no derivatives given");
  for (const auto& d : dpsis) {
    if (d.size() != psi.dim()) {
      throw std::invalid_argument("qfim_pure: derivative dimension mismatch");
    }
  }
  const int d = static_cast<int>(dpsis.size());
  std::vector<Cx> overlaps(d);
  for (int k = 0; k < d; ++k) overlaps[k] = psi.amplitudes.dot(dpsis[k]);  // <psi|d_k>
  RMat q(d, d);
  for (int k = 0; k < d; ++k) {
    for (int l = k; l < d; ++l) {
      const Cx g = dpsis[k].dot(dpsis[l]);  // <d_k|d_l>
      const Cx berry = std::conj(overlaps[k]) * overlaps[l];
      q(k, l) = 4.0 * (g - berry).real();
      q(l, k) = q(k, l);
    }
  }
  return FisherMatrix(std::move(q), FisherKind::quantum);
}

FisherMatrix qfim_pure_from_raw(const StateVector& psi, const std::vector<PsiSum>& sums,
                                double t, double mu, int samples) {
  if (sums.empty()) throw std::invalid_argument("qfim_pure_from_raw: no sums given");
  if (samples < 1) throw std::invalid_argument("qfim_pure_from_raw: samples must be >= 1");
  const double st = std::sin(t * mu);
  if (std::abs(st) <= tol::sin_guard) {
    throw numerical_guard_error("qfim_pure_from_raw: sin(t mu) vanishes");
  }
  for (const auto& sum : sums) {
    if (sum.t != t || sum.mu != mu || sum.samples != samples) {
      throw std::invalid_argument(
          "qfim_pure_from_raw: sampling metadata mismatch (expected t=" +
          std::to_string(t) + ", mu=" + std::to_string(mu) +
          ", N=" + std::to_string(samples) + ")");
    }
  }
  const double scale = t / (2.0 * samples * st);
  std::vector<Vec> dpsis;
  dpsis.reserve(sums.size());
  for (const auto& sum : sums) dpsis.push_back(scale * sum.raw);
  return qfim_pure(psi, dpsis);
}

FisherMatrix qfim_mixed(const DensityMatrix& rho, const std::vector<Mat>& drhos,
                        double cutoff) {
  if (drhos.empty()) throw std::invalid_argument("qfim_mixed: no derivatives given");
  for (const auto& m : drhos) {
    if (m.rows() != rho.dim() || m.cols() != rho.dim()) {
      throw std::invalid_argument("qfim_mixed: derivative dimension mismatch");
    }
    if (detail::hermiticity_residual(m) > 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument("qfim_mixed: derivative is not Hermitian");
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix);
  const RVec& p = es.eigenvalues();
  const Mat& v = es.eigenvectors();
  const int d = static_cast<int>(drhos.size());
  const Eigen::Index dim = rho.dim();

  std::vector<Mat> in_basis;
  in_basis.reserve(drhos.size());
  for (const auto& m : drhos) in_basis.push_back(v.adjoint() * m * v);

  RMat q = RMat::Zero(d, d);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      const double denom = p[a] + p[b];
      if (denom <= cutoff) continue;
      for (int k = 0; k < d; ++k) {
        for (int l = k; l < d; ++l) {
          const double term =
              2.0 * (in_basis[k](a, b) * std::conj(in_basis[l](a, b))).real() / denom;
          q(k, l) += term;
          if (l != k) q(l, k) += term;
        }
      }
    }
  }
  return FisherMatrix(std::move(q), FisherKind::quantum, cutoff);
}

HermitianOperator sld(const DensityMatrix& rho, const Mat& drho, double cutoff) {
  if (drho.rows() != rho.dim() || drho.cols() != rho.dim()) {
    throw std::invalid_argument("sld: derivative dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix);
  const RVec& p = es.eigenvalues();
  const Mat& v = es.eigenvectors();
  const Mat a = v.adjoint() * drho * v;
  Mat l = Mat::Zero(rho.dim(), rho.dim());
  for (Eigen::Index i = 0; i < rho.dim(); ++i) {
    for (Eigen::Index j = 0; j < rho.dim(); ++j) {
      const double denom = p[i] + p[j];
      if (denom > cutoff) l(i, j) = 2.0 * a(i, j) / denom;
    }
  }
  Mat out = v * l * v.adjoint();
  out = ((out + out.adjoint()) / 2.0).eval();
  return HermitianOperator(std::move(out));
}

FisherMatrix cfim(const RVec& probs, const std::vector<RVec>& dprobs, double floor) {
  if (dprobs.empty()) throw std::invalid_argument("cfim: no derivatives given");
  if (probs.minCoeff() < -1e-10) {
    throw std::invalid_argument("cfim: negative probability " +
                                std::to_string(probs.minCoeff()));
  }
  if (std::abs(probs.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("cfim: probabilities sum to " +
                                std::to_string(probs.sum()));
  }
  for (const auto& dp : dprobs) {
    if (dp.size() != probs.size()) {
      throw std::invalid_argument("cfim: derivative length mismatch");
    }
    if (std::abs(dp.sum()) > 1e-9) {
      throw std::invalid_argument("cfim: derivative does not sum to zero (" +
                                  std::to_string(dp.sum()) + ")");
    }
  }
  const int d = static_cast<int>(dprobs.size());
  RMat f = RMat::Zero(d, d);
  for (Eigen::Index x = 0; x < probs.size(); ++x) {
    const double w = 1.0 / std::max(probs[x], floor);
    for (int k = 0; k < d; ++k) {
      for (int l = k; l < d; ++l) {
        const double term = dprobs[k][x] * dprobs[l][x] * w;
        f(k, l) += term;
        if (l != k) f(l, k) += term;
      }
    }
  }
  return FisherMatrix(std::move(f), FisherKind::classical, floor);
}

CrbResult crb(const FisherMatrix& f, int repetitions) {
  if (repetitions < 1) throw std::invalid_argument("crb: repetitions must be >= 1");
  Eigen::SelfAdjointEigenSolver<RMat> es(f.entries);
  const RVec& lam = es.eigenvalues();
  const double lam_min = lam.minCoeff();
  const double lam_max = lam.maxCoeff();
  CrbResult result;
  if (lam_min <= 0.0 || lam_max / lam_min > tol::crb_condition) {
    result.value = std::numeric_limits<double>::infinity();
    result.bounded = false;
    Eigen::Index idx = 0;
    lam.minCoeff(&idx);
    result.null_direction = es.eigenvectors().col(idx);
    return result;
  }
  double trace_inv = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) trace_inv += 1.0 / lam[i];
  result.value = trace_inv / repetitions;
  result.null_direction = RVec::Zero(lam.size());
  return result;
}

nlohmann::json fisher_to_json(const FisherMatrix& f,
                              const std::map<std::string, std::string>& metadata) {
  nlohmann::json j;
  j["kind"] = f.kind == FisherKind::quantum ? "quantum" : "classical";
  j["d"] = f.dim();
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(f.dim()) * f.dim());
  for (int r = 0; r < f.dim(); ++r) {
    for (int c = 0; c < f.dim(); ++c) flat.push_back(f.entries(r, c));
  }
  j["entries"] = flat;
  j["cutoff"] = f.cutoff;
  j["metadata"] = metadata;
  return j;
}

FisherMatrix fisher_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const auto flat = j.at("entries").get<std::vector<double>>();
  if (flat.size() != static_cast<size_t>(d) * d) {
    throw std::invalid_argument("fisher_from_json: entry count does not match d");
  }
  RMat m(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) m(r, c) = flat[static_cast<size_t>(r) * d + c];
  }
  const auto kind = j.at("kind").get<std::string>() == "classical" ? FisherKind::classical
                                                                   : FisherKind::quantum;
  return FisherMatrix(std::move(m), kind, j.value("cutoff", 0.0));
}

}  // namespace qpsr
