#pragma once

#include <cmath>
#include <vector>

#include "bcs/controls.hpp"
#include "bcs/dyson.hpp"
#include "bcs/errors.hpp"
#include "bcs/linops.hpp"

// Reference solvers for the mild solution, kept deliberately independent
// of the hierarchy propagator: a direct RK4 integration of the bilinear
// ODE and a Picard fixed-point sweep on the Duhamel integral equation.
// They exist for cross-checks, not speed.

namespace bcs::oracle {

using controls::PiecewiseConstantControl;

/// Classical RK4 on psi' = (A + u(t) B) psi with `steps` uniform
/// sub-steps per constant-control segment.
template <typename Scalar>
Vector<Scalar> propagate_oracle(const Matrix<Scalar>& A, const Matrix<Scalar>& B,
                                const Vector<Scalar>& psi0,
                                const PiecewiseConstantControl& u, double t,
                                int steps) {
  dyson::detail::validate_system(A, B, psi0);
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("propagate_oracle: t must be >= 0 and finite");
  }
  if (steps < 1) {
    throw InvalidInputError("propagate_oracle: steps must be >= 1");
  }
  Vector<Scalar> psi = psi0;
  for (const auto& seg : dyson::detail::control_segments(u, t)) {
    const Matrix<Scalar> gen = A + Scalar(seg.u) * B;
    const double h = (seg.t1 - seg.t0) / steps;
    Vector<Scalar> k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size());
    for (int s = 0; s < steps; ++s) {
      k1 = gen * psi;
      k2 = gen * (psi + (h / 2.0) * k1);
      k3 = gen * (psi + (h / 2.0) * k2);
      k4 = gen * (psi + h * k3);
      psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!psi.allFinite()) {
      throw OverflowError("propagate_oracle: state became non-finite before t = " +
                              std::to_string(seg.t1),
                          -1);
    }
  }
  return psi;
}

/// Picard iteration on the Duhamel formula,
///   psi^{k+1}(t) = e^{tA} psi0 + int_0^t e^{(t-s)A} B psi^k(s) u(s) ds,
/// starting from psi^0(s) = e^{sA} psi0, with composite trapezoid
/// quadrature on a uniform grid of `grid` intervals. The control factor
/// is taken at each interval midpoint, where a piecewise-constant u is
/// exact; sampling it at the nodes would smear its jumps over a full
/// trapezoid weight. Returns psi^{iterations}(t). k sweeps reproduce
/// the Dyson partial sum of order k up to quadrature error.
template <typename Scalar>
Vector<Scalar> picard_solution(const Matrix<Scalar>& A, const Matrix<Scalar>& B,
                               const Vector<Scalar>& psi0,
                               const PiecewiseConstantControl& u, double t,
                               int iterations, int grid) {
  dyson::detail::validate_system(A, B, psi0);
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("picard_solution: t must be >= 0 and finite");
  }
  if (iterations < 1 || grid < 1) {
    throw InvalidInputError("picard_solution: iterations and grid must be >= 1");
  }
  if (t == 0.0) {
    return psi0;
  }

  const auto n = static_cast<std::size_t>(grid);
  const double h = t / static_cast<double>(grid);
  const Eigen::Index dim = A.rows();

  // e^{s_i A} for every node; (i-j) indexes e^{(s_i - s_j)A}.
  std::vector<Matrix<Scalar>> semigroup(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    semigroup[i] = linops::expm(A, h * static_cast<double>(i));
  }
  // u at the midpoint of interval j = [s_j, s_{j+1}].
  std::vector<double> u_mid(n);
  for (std::size_t j = 0; j < n; ++j) {
    u_mid[j] = u.eval(h * (static_cast<double>(j) + 0.5));
  }

  Matrix<Scalar> psi(dim, n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    psi.col(i) = semigroup[i] * psi0;
  }

  Matrix<Scalar> forcing(dim, n + 1);
  Matrix<Scalar> next(dim, n + 1);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t j = 0; j <= n; ++j) {
      forcing.col(j) = B * psi.col(j);
    }
    for (std::size_t i = 0; i <= n; ++i) {
      Vector<Scalar> acc = semigroup[i] * psi0;
      if (i > 0) {
        Vector<Scalar> integral = Vector<Scalar>::Zero(dim);
        for (std::size_t j = 0; j <= i; ++j) {
          // Trapezoid node weight with the adjacent interval u factors.
          const double left = (j > 0) ? u_mid[j - 1] : 0.0;
          const double right = (j < i) ? u_mid[j] : 0.0;
          const double weight = 0.5 * (left + right);
          if (weight == 0.0) continue;
          integral += Scalar(weight) * (semigroup[i - j] * forcing.col(j));
        }
        acc += Scalar(h) * integral;
      }
      next.col(i) = acc;
    }
    psi.swap(next);
    if (!psi.allFinite()) {
      throw OverflowError("picard_solution: iterate " + std::to_string(it + 1) +
                              " became non-finite",
                          -1);
    }
  }
  return psi.col(n);
}

}  // namespace bcs::oracle
