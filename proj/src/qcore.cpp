#include "qpsr/qcore.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpsr {

namespace detail {

bool power_of_two(Eigen::Index x) { return x > 0 && (x & (x - 1)) == 0; }

int qubit_count(Eigen::Index dim) {
  if (dim < 2 || !power_of_two(dim)) {
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " is not 2^n for n >= 1");
  }
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

double hermiticity_residual(const Mat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Mat expm_hermitian(const Mat& h, double theta) {
  if (h.rows() != h.cols()) {
    throw std::invalid_argument("expm_hermitian: matrix is not square");
  }
  const double res = hermiticity_residual(h);
  if (res > 1e-10) {
    throw std::invalid_argument("expm_hermitian: input is not Hermitian, residual " +
                                std::to_string(res));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    phases[i] = std::exp(Cx(0.0, -theta * es.eigenvalues()[i]));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat conjugate(const Mat& u, const Mat& rho) { return u * rho * u.adjoint(); }

}  // namespace detail

Axis axis_from_char(char c) {
  switch (c) {
    case 'x': return Axis::x;
    case 'y': return Axis::y;
    case 'z': return Axis::z;
    default: throw std::invalid_argument(std::string("unknown Pauli axis '") + c + "'");
  }
}

char axis_char(Axis axis) {
  switch (axis) {
    case Axis::x: return 'x';
    case Axis::y: return 'y';
    default: return 'z';
  }
}

Mat pauli(Axis axis) {
  Mat m(2, 2);
  switch (axis) {
    case Axis::x:
      m << Cx(0, 0), Cx(1, 0), Cx(1, 0), Cx(0, 0);
      break;
    case Axis::y:
      m << Cx(0, 0), Cx(0, -1), Cx(0, 1), Cx(0, 0);
      break;
    case Axis::z:
      m << Cx(1, 0), Cx(0, 0), Cx(0, 0), Cx(-1, 0);
      break;
  }
  return m;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

StateVector::StateVector(Vec amps) : amplitudes(std::move(amps)) {
  qubits = detail::qubit_count(amplitudes.size());
  const double norm = amplitudes.norm();
  if (std::abs(norm - 1.0) > tol::state_norm) {
    throw std::invalid_argument("StateVector: norm " + std::to_string(norm) +
                                " deviates from 1 beyond tolerance");
  }
}

DensityMatrix::DensityMatrix(Mat m) : matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("DensityMatrix: matrix is not square");
  }
  qubits = detail::qubit_count(matrix.rows());
  const double herm = detail::hermiticity_residual(matrix);
  if (herm > tol::hermitian) {
    throw std::invalid_argument("DensityMatrix: Hermiticity residual " +
                                std::to_string(herm));
  }
  const double tr_err = std::abs(matrix.trace().real() - 1.0) + std::abs(matrix.trace().imag());
  if (tr_err > tol::trace_one) {
    throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                std::to_string(tr_err));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::state_psd) {
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes * psi.amplitudes.adjoint());
}

HermitianOperator::HermitianOperator(Mat m) : matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("HermitianOperator: matrix is not square");
  }
  const double res = detail::hermiticity_residual(matrix);
  if (res > tol::hermitian) {
    throw std::invalid_argument("HermitianOperator: Hermiticity residual " +
                                std::to_string(res));
  }
}

UnitaryOperator::UnitaryOperator(Mat m) : matrix(std::move(m)) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("UnitaryOperator: matrix is not square");
  }
  const double res =
      (matrix.adjoint() * matrix - Mat::Identity(matrix.rows(), matrix.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (res > tol::unitarity) {
    throw std::invalid_argument("UnitaryOperator: U^dag U - I residual " +
                                std::to_string(res));
  }
}

UnitaryOperator expm_hermitian(const HermitianOperator& h, double theta) {
  return UnitaryOperator(detail::expm_hermitian(h.matrix, theta));
}

HermitianOperator collective_pauli(Axis axis, int qubits) {
  if (qubits < 1) throw std::invalid_argument("collective_pauli: qubit count must be >= 1");
  if (qubits > 12) throw std::invalid_argument("collective_pauli: dense construction capped at 12 qubits");
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  const Mat sigma = pauli(axis);
  Mat sum = Mat::Zero(dim, dim);
  for (int k = 0; k < qubits; ++k) {
    Mat term = Mat::Identity(1, 1);
    for (int q = 0; q < qubits; ++q) {
      term = kron(term, q == k ? sigma : Mat::Identity(2, 2));
    }
    sum += term;
  }
  return HermitianOperator(std::move(sum));
}

StateVector ghz(int qubits) {
  if (qubits < 1) throw std::invalid_argument("ghz: qubit count must be >= 1");
  if (qubits > 12) throw std::invalid_argument("ghz: dense construction capped at 12 qubits");
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  Vec amps = Vec::Zero(dim);
  const double r = 1.0 / std::sqrt(2.0);
  amps[0] = Cx(r, 0);
  amps[dim - 1] = Cx(r, 0);
  return StateVector(std::move(amps));
}

StateVector evolve(const UnitaryOperator& u, const StateVector& psi) {
  if (u.dim() != psi.dim()) {
    throw std::invalid_argument("evolve: unitary and state dimensions differ");
  }
  return StateVector(u.matrix * psi.amplitudes);
}

DensityMatrix evolve(const UnitaryOperator& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) {
    throw std::invalid_argument("evolve: unitary and state dimensions differ");
  }
  return DensityMatrix(detail::conjugate(u.matrix, rho.matrix));
}

HermitianOperator projector(const StateVector& psi) {
  return HermitianOperator(psi.amplitudes * psi.amplitudes.adjoint());
}

StateVector haar_product_state(int qubits, Rng& rng) {
  if (qubits < 1) throw std::invalid_argument("haar_product_state: qubit count must be >= 1");
  Vec state = Vec::Ones(1);
  for (int q = 0; q < qubits; ++q) {
    Vec single(2);
    single[0] = Cx(rng.gaussian(), rng.gaussian());
    single[1] = Cx(rng.gaussian(), rng.gaussian());
    single /= single.norm();
    state = kron(state, single);
  }
  return StateVector(std::move(state));
}

DensityMatrix random_density(int qubits, Rng& rng) {
  if (qubits < 1) throw std::invalid_argument("random_density: qubit count must be >= 1");
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  Mat g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      g(i, j) = Cx(rng.gaussian(), rng.gaussian());
    }
  }
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = (rho + rho.adjoint()).eval() / 2.0;
  return DensityMatrix(std::move(rho));
}

Mat random_pauli_word(int qubits, Rng& rng) {
  if (qubits < 1) throw std::invalid_argument("random_pauli_word: qubit count must be >= 1");
  std::vector<int> digits(qubits);
  bool nontrivial = false;
  for (int q = 0; q < qubits; ++q) {
    digits[q] = static_cast<int>(rng.next_u64() % 4);
    nontrivial = nontrivial || digits[q] != 0;
  }
  if (!nontrivial) {
    digits[static_cast<int>(rng.next_u64() % qubits)] = 1 + static_cast<int>(rng.next_u64() % 3);
  }
  Mat word = Mat::Identity(1, 1);
  for (int q = 0; q < qubits; ++q) {
    const Mat factor = digits[q] == 0 ? Mat(Mat::Identity(2, 2))
                                      : pauli(static_cast<Axis>(digits[q] - 1));
    word = kron(word, factor);
  }
  return word;
}

}  // namespace qpsr
