#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include "bcs/errors.hpp"

namespace bcs {

/// Dense column-major matrix over the problem's scalar field.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense state vector over the problem's scalar field.
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;

template <typename Scalar>
inline constexpr bool is_complex_v = std::is_same_v<Scalar, Complex>;

namespace linops {

/// Growth certificate for the semigroup generated by A:
///   ||e^{tA}|| <= m * exp(omega * t)  for all t >= 0.
struct SemigroupBounds {
  double m = 1.0;
  double omega = 0.0;
};

template <typename Scalar>
void require_finite(const Matrix<Scalar>& a, const std::string& name) {
  if (!a.allFinite()) {
    throw InvalidInputError(name + " has non-finite entries");
  }
}

template <typename Scalar>
void require_finite(const Vector<Scalar>& v, const std::string& name) {
  if (!v.allFinite()) {
    throw InvalidInputError(name + " has non-finite entries");
  }
}

template <typename Scalar>
void require_square(const Matrix<Scalar>& a, const std::string& name) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InvalidInputError(name + " must be a nonempty square matrix, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

template <typename Scalar>
void require_operator(const Matrix<Scalar>& a, const std::string& name) {
  require_square(a, name);
  require_finite(a, name);
}

/// Matrix exponential e^{tA} (Pade scaling-and-squaring).
template <typename Scalar>
Matrix<Scalar> expm(const Matrix<Scalar>& a, double t) {
  require_operator(a, "A");
  if (!std::isfinite(t)) {
    throw InvalidInputError("expm: t must be finite");
  }
  Matrix<Scalar> scaled = a * Scalar(t);
  return scaled.exp();
}

/// Spectral norm (largest singular value).
template <typename Scalar>
double operator_norm(const Matrix<Scalar>& a) {
  require_operator(a, "A");
  if (a.rows() == 1) {
    return std::abs(a(0, 0));
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a);
  return svd.singularValues()(0);
}

/// Logarithmic-norm growth certificate: m = 1, omega = mu(A) where mu is
/// the largest eigenvalue of the Hermitian part (A + A*)/2. This is the
/// smallest omega with ||e^{tA}|| <= e^{omega t} in the Euclidean norm,
/// so the pair is valid with equality at t = 0.
template <typename Scalar>
SemigroupBounds semigroup_bounds(const Matrix<Scalar>& a) {
  require_operator(a, "A");
  Matrix<Scalar> sym = (a + a.adjoint()) / Scalar(2.0);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym, Eigen::EigenvaluesOnly);
  return SemigroupBounds{1.0, es.eigenvalues().maxCoeff()};
}

}  // namespace linops
}  // namespace bcs
