#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qpsr/constants.hpp"
#include "qpsr/errors.hpp"
#include "qpsr/rng.hpp"

namespace qpsr {

using Cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class Axis { x, y, z };

Axis axis_from_char(char c);
char axis_char(Axis axis);

/// 2x2 Pauli matrix for the given axis.
Mat pauli(Axis axis);

/// Dense Kronecker product.
Mat kron(const Mat& a, const Mat& b);
Vec kron(const Vec& a, const Vec& b);

/// Pure state of an n-qubit register. The amplitude vector length must be a
/// power of two and the L2 norm must equal 1 within tol::state_norm.
struct StateVector {
  Vec amplitudes;
  int qubits = 0;

  explicit StateVector(Vec amps);
  int dim() const { return static_cast<int>(amplitudes.size()); }
};

/// Mixed state of an n-qubit register: Hermitian within tol::hermitian,
/// unit trace within tol::trace_one, eigenvalues >= -tol::state_psd.
struct DensityMatrix {
  Mat matrix;
  int qubits = 0;

  explicit DensityMatrix(Mat m);
  static DensityMatrix pure(const StateVector& psi);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

struct HermitianOperator {
  Mat matrix;

  explicit HermitianOperator(Mat m);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

struct UnitaryOperator {
  Mat matrix;

  explicit UnitaryOperator(Mat m);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// e^{-i theta H} through the spectral decomposition of H. Exact to machine
/// precision at the dimensions in scope.
UnitaryOperator expm_hermitian(const HermitianOperator& h, double theta);

/// Sum of single-site sigma_axis over all n qubits (dimension 2^n).
HermitianOperator collective_pauli(Axis axis, int qubits);

/// (|0...0> + |1...1>)/sqrt(2). For n = 1 this is |+>.
StateVector ghz(int qubits);

StateVector evolve(const UnitaryOperator& u, const StateVector& psi);
DensityMatrix evolve(const UnitaryOperator& u, const DensityMatrix& rho);

/// Projector |psi><psi| as a Hermitian operator.
HermitianOperator projector(const StateVector& psi);

// Seeded random constructions shared by the tomography driver and the tests.
StateVector haar_product_state(int qubits, Rng& rng);
DensityMatrix random_density(int qubits, Rng& rng);  // normalized Ginibre
Mat random_pauli_word(int qubits, Rng& rng);         // tensor of {I,X,Y,Z}, never all-I

namespace detail {

bool power_of_two(Eigen::Index x);
int qubit_count(Eigen::Index dim);  // throws unless dim = 2^n, n >= 1
double hermiticity_residual(const Mat& m);

// Unvalidated fast paths used by the estimator loops.
Mat expm_hermitian(const Mat& h, double theta);
Mat conjugate(const Mat& u, const Mat& rho);  // U rho U^dag

}  // namespace detail

}  // namespace qpsr
