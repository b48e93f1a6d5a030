#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bcs/controls.hpp"
#include "bcs/errors.hpp"
#include "bcs/linops.hpp"

namespace bcs::dyson {

using controls::PiecewiseConstantControl;
using linops::SemigroupBounds;

struct DysonConfig {
  /// RK4 steps taken inside each constant-control run.
  int grid_points_per_piece = 32;
  /// Hard cap on the series truncation order.
  int max_order = 40;
};

inline void validate(const DysonConfig& cfg) {
  if (cfg.grid_points_per_piece < 2) {
    throw InvalidInputError("DysonConfig: grid_points_per_piece must be >= 2");
  }
  if (cfg.max_order < 1) {
    throw InvalidInputError("DysonConfig: max_order must be >= 1");
  }
}

template <typename Scalar>
struct PropagationResult {
  Vector<Scalar> state;
  int truncation_order = 0;
  /// Certified: psi0_norm * sum of tail_bound over p >= truncation_order.
  double series_error_bound = 0.0;
  /// Empirical: state difference against a doubled-resolution rerun.
  double quadrature_error_estimate = 0.0;
  std::chrono::duration<double> elapsed{0.0};
};

/// Operator-norm bound on the p-th Dyson term,
///   ||W_p(t,u)|| <= m e^{omega t} (B_norm * u_l1)^p / p!,
/// evaluated as a running product of the term ratios x/k so the exact
/// factorial-decay identity tail(p+1) = tail(p) * x/(p+1) holds in
/// floating point and no intermediate x^p or p! ever overflows.
inline double tail_bound(int p, double t, double u_l1, SemigroupBounds bounds,
                         double B_norm) {
  if (p < 0 || t < 0.0 || u_l1 < 0.0 || B_norm < 0.0) {
    throw InvalidInputError("tail_bound: need p >= 0, t >= 0, u_l1 >= 0, B_norm >= 0");
  }
  const double x = B_norm * u_l1;
  double term = bounds.m * std::exp(bounds.omega * t);
  for (int k = 1; k <= p; ++k) {
    term *= x / static_cast<double>(k);
  }
  return term;
}

namespace detail {

/// sum_{p >= n} x^p / p! for x >= 0. Equals e^x minus the degree-(n-1)
/// Taylor partial sum; summed forward from p = n when that difference
/// would cancel (x < n), by complement otherwise.
inline double exp_tail(double x, int n) {
  if (x == 0.0) {
    return (n == 0) ? 1.0 : 0.0;
  }
  if (n == 0) {
    return std::exp(x);
  }
  if (x < static_cast<double>(n)) {
    double term = 1.0;
    for (int k = 1; k <= n; ++k) {
      term *= x / static_cast<double>(k);
    }
    double sum = 0.0;
    for (int p = n; p < n + 100000; ++p) {
      sum += term;
      term *= x / static_cast<double>(p + 1);
      if (term <= sum * 1e-18) {
        break;
      }
    }
    return sum;
  }
  double partial = 0.0;
  double term = 1.0;
  for (int p = 0; p < n; ++p) {
    partial += term;
    term *= x / static_cast<double>(p + 1);
  }
  return std::exp(x) - partial;
}

}  // namespace detail

/// Certified bound on || sum_{p >= from_order} W_p(t,u) psi ||, per unit
/// of ||psi||. This is what choose_truncation compares against eps/2 and
/// what PropagationResult::series_error_bound re-derives from.
inline double tail_sum(int from_order, double t, double u_l1, SemigroupBounds bounds,
                       double B_norm) {
  if (from_order < 0 || t < 0.0 || u_l1 < 0.0 || B_norm < 0.0) {
    throw InvalidInputError("tail_sum: need from_order >= 0, t >= 0, u_l1 >= 0");
  }
  const double pref = bounds.m * std::exp(bounds.omega * t);
  return pref * detail::exp_tail(B_norm * u_l1, from_order);
}

/// Smallest N <= max_order with psi0_norm * tail_sum(N, ...) <= eps/2.
inline int choose_truncation(double eps, double t, double u_l1, double psi0_norm,
                             SemigroupBounds bounds, double B_norm, int max_order) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidInputError("choose_truncation: eps must be positive and finite");
  }
  if (max_order < 0) {
    throw InvalidInputError("choose_truncation: max_order must be >= 0");
  }
  for (int n = 0; n <= max_order; ++n) {
    if (psi0_norm * tail_sum(n, t, u_l1, bounds, B_norm) <= eps / 2.0) {
      return n;
    }
  }
  const double achievable = 2.0 * psi0_norm * tail_sum(max_order, t, u_l1, bounds, B_norm);
  throw CertificateUnreachableError(
      "choose_truncation: order cap " + std::to_string(max_order) +
          " only certifies eps = " + std::to_string(achievable) + ", requested " +
          std::to_string(eps),
      achievable / 2.0, max_order);
}

/// A-priori Gronwall bound on the mild solution:
///   ||psi(t)|| <= m e^{omega t} ||psi0|| exp(m e^{omega t} ||B|| ∫|u|).
/// For omega < 0 the growth factor inside the exponential is clamped at
/// its t = 0 value; the Gronwall argument gives exp(m ||B|| ∫|u|) there
/// and a smaller factor would not bound the solution.
inline double apriori_bound(double t, double u_l1, double psi0_norm,
                            SemigroupBounds bounds, double B_norm) {
  if (t < 0.0 || u_l1 < 0.0) {
    throw InvalidInputError("apriori_bound: need t >= 0 and u_l1 >= 0");
  }
  const double growth = bounds.m * std::exp(std::max(bounds.omega, 0.0) * t);
  return bounds.m * std::exp(bounds.omega * t) * psi0_norm *
         std::exp(growth * B_norm * u_l1);
}

namespace detail {

/// Maximal subintervals of [0, t] on which the control is constant:
/// the control's pieces clipped to [0, t] plus the zero tail beyond its
/// support. Empty for t == 0.
struct Segment {
  double t0;
  double t1;
  double u;
};

inline std::vector<Segment> control_segments(const PiecewiseConstantControl& u,
                                             double t) {
  std::vector<Segment> segs;
  const auto& bp = u.breakpoints();
  const auto& vals = u.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double lo = bp[i];
    const double hi = std::min(bp[i + 1], t);
    if (hi > lo) {
      segs.push_back({lo, hi, vals[i]});
    }
  }
  if (t > u.support_end()) {
    segs.push_back({u.support_end(), t, 0.0});
  }
  return segs;
}

template <typename Scalar>
void check_finite_levels(const Vector<Scalar>& w0, const Matrix<Scalar>& higher,
                         double at_time) {
  if (!w0.allFinite()) {
    throw OverflowError("hierarchy order 0 became non-finite at t = " +
                            std::to_string(at_time),
                        0);
  }
  for (Eigen::Index c = 0; c < higher.cols(); ++c) {
    if (!higher.col(c).allFinite()) {
      throw OverflowError("hierarchy order " + std::to_string(c + 1) +
                              " became non-finite at t = " + std::to_string(at_time),
                          static_cast<int>(c + 1));
    }
  }
}

/// Integrates the Dyson hierarchy
///   w_0' = A w_0,                w_0(0) = psi0,
///   w_p' = A w_p + u(t) B w_{p-1},  w_p(0) = 0   (p = 1..p_max)
/// over [0, max(record_times)], storing all levels at each requested
/// time. Order 0 is transported by exact semigroup factors; the higher
/// levels take classical RK4 steps with the constant piece value of u,
/// so the control itself contributes no sampling error. Runs with u = 0
/// decouple and are transported exactly as well.
///
/// record_times must be sorted ascending, within [0, support of the
/// integration], and are hit exactly (steps never straddle them).
template <typename Scalar>
std::vector<std::vector<Vector<Scalar>>> integrate_hierarchy(
    const Matrix<Scalar>& A, const Matrix<Scalar>& B, const Vector<Scalar>& psi0,
    const PiecewiseConstantControl& u, int p_max,
    const std::vector<double>& record_times, int steps_per_run) {
  const Eigen::Index dim = A.rows();
  const double t_end = record_times.empty() ? 0.0 : record_times.back();

  Vector<Scalar> w0 = psi0;
  Matrix<Scalar> higher = Matrix<Scalar>::Zero(dim, p_max);

  std::vector<std::vector<Vector<Scalar>>> out;
  out.reserve(record_times.size());
  auto record = [&]() {
    std::vector<Vector<Scalar>> levels;
    levels.reserve(static_cast<std::size_t>(p_max) + 1);
    levels.push_back(w0);
    for (Eigen::Index c = 0; c < higher.cols(); ++c) {
      levels.push_back(higher.col(c));
    }
    out.push_back(std::move(levels));
  };

  std::size_t next_rec = 0;
  while (next_rec < record_times.size() && record_times[next_rec] <= 0.0) {
    record();
    ++next_rec;
  }

  // Cache of half-step propagators keyed by step size; run lengths take
  // few distinct values so this collapses the expm count.
  std::map<double, Matrix<Scalar>> half_step_cache;
  const auto half_step = [&](double h) -> const Matrix<Scalar>& {
    auto it = half_step_cache.find(h);
    if (it == half_step_cache.end()) {
      it = half_step_cache.emplace(h, linops::expm(A, h / 2.0)).first;
    }
    return it->second;
  };
  std::map<double, Matrix<Scalar>> full_cache;
  const auto full_step = [&](double len) -> const Matrix<Scalar>& {
    auto it = full_cache.find(len);
    if (it == full_cache.end()) {
      it = full_cache.emplace(len, linops::expm(A, len)).first;
    }
    return it->second;
  };

  Matrix<Scalar> shifted(dim, p_max), k1(dim, p_max), k2(dim, p_max), k3(dim, p_max),
      k4(dim, p_max), stage(dim, p_max);
  // Derivative of the stacked levels 1..p_max given the exact order-0
  // value at the stage time.
  const auto deriv = [&](const Matrix<Scalar>& y, const Vector<Scalar>& w0_stage,
                         double uval, Matrix<Scalar>& dst) {
    shifted.col(0) = w0_stage;
    if (p_max > 1) {
      shifted.rightCols(p_max - 1) = y.leftCols(p_max - 1);
    }
    dst = A * y + Scalar(uval) * (B * shifted);
  };

  const auto run = [&](double from, double to, double uval) {
    const double len = to - from;
    if (len <= 0.0) {
      return;
    }
    if (uval == 0.0 || p_max == 0) {
      // Forcing vanishes: every level is transported by the semigroup.
      const Matrix<Scalar>& e = full_step(len);
      w0 = e * w0;
      if (p_max > 0) {
        higher = e * higher;
      }
      return;
    }
    const double h = len / steps_per_run;
    const Matrix<Scalar>& eh2 = half_step(h);
    for (int s = 0; s < steps_per_run; ++s) {
      const Vector<Scalar> w0_mid = eh2 * w0;
      const Vector<Scalar> w0_end = eh2 * w0_mid;
      deriv(higher, w0, uval, k1);
      stage = higher + (h / 2.0) * k1;
      deriv(stage, w0_mid, uval, k2);
      stage = higher + (h / 2.0) * k2;
      deriv(stage, w0_mid, uval, k3);
      stage = higher + h * k3;
      deriv(stage, w0_end, uval, k4);
      higher += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      w0 = w0_end;
    }
  };

  for (const Segment& seg : control_segments(u, t_end)) {
    double cur = seg.t0;
    while (cur < seg.t1) {
      double target = seg.t1;
      if (next_rec < record_times.size() && record_times[next_rec] < target) {
        target = std::max(record_times[next_rec], cur);
      }
      run(cur, target, seg.u);
      cur = target;
      while (next_rec < record_times.size() && record_times[next_rec] <= cur) {
        record();
        ++next_rec;
      }
    }
    check_finite_levels(w0, higher, seg.t1);
  }
  // Any residual record times equal to t_end (e.g. duplicates).
  while (next_rec < record_times.size()) {
    record();
    ++next_rec;
  }
  return out;
}

template <typename Scalar>
void validate_system(const Matrix<Scalar>& A, const Matrix<Scalar>& B,
                     const Vector<Scalar>& psi0) {
  linops::require_operator(A, "A");
  linops::require_operator(B, "B");
  linops::require_finite(psi0, "psi0");
  if (B.rows() != A.rows()) {
    throw InvalidInputError("A and B must have matching dimensions");
  }
  if (psi0.size() != A.rows()) {
    throw InvalidInputError("psi0 length must match operator dimension");
  }
}

}  // namespace detail

/// Actions W_p(t,u) psi0 for p = 0..p_max, via the ODE hierarchy.
template <typename Scalar>
std::vector<Vector<Scalar>> w_terms(const Matrix<Scalar>& A, const Matrix<Scalar>& B,
                                    const Vector<Scalar>& psi0,
                                    const PiecewiseConstantControl& u, double t,
                                    int p_max, const DysonConfig& cfg) {
  detail::validate_system(A, B, psi0);
  validate(cfg);
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("w_terms: t must be >= 0 and finite");
  }
  if (p_max < 0) {
    throw InvalidInputError("w_terms: p_max must be >= 0");
  }
  if (t == 0.0) {
    std::vector<Vector<Scalar>> levels(static_cast<std::size_t>(p_max) + 1,
                                       Vector<Scalar>::Zero(psi0.size()));
    levels[0] = psi0;
    return levels;
  }
  auto recs = detail::integrate_hierarchy(A, B, psi0, u, p_max, {t},
                                          cfg.grid_points_per_piece);
  return std::move(recs.front());
}

/// Truncated Dyson propagation with a certified series tail and an
/// empirical quadrature estimate from one grid doubling.
template <typename Scalar>
PropagationResult<Scalar> propagate_dyson(const Matrix<Scalar>& A,
                                          const Matrix<Scalar>& B,
                                          const Vector<Scalar>& psi0,
                                          const PiecewiseConstantControl& u, double t,
                                          double eps, const DysonConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  detail::validate_system(A, B, psi0);
  validate(cfg);
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw InvalidInputError("propagate_dyson: t must be >= 0 and finite");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidInputError("propagate_dyson: eps must be positive and finite");
  }

  PropagationResult<Scalar> result;
  if (t == 0.0) {
    result.state = psi0;
    result.truncation_order = 1;
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
  }

  const SemigroupBounds bounds = linops::semigroup_bounds(A);
  const double B_norm = linops::operator_norm(B);
  const double u_l1 = u.l1_norm_up_to(t);
  const double psi0_norm = psi0.norm();

  const int order = choose_truncation(eps, t, u_l1, psi0_norm, bounds, B_norm,
                                      cfg.max_order);
  result.truncation_order = order;
  result.series_error_bound = psi0_norm * tail_sum(order, t, u_l1, bounds, B_norm);

  if (order == 0) {
    result.state = Vector<Scalar>::Zero(psi0.size());
    result.elapsed = std::chrono::steady_clock::now() - start;
    return result;
  }

  const auto sum_levels = [&](const DysonConfig& c) {
    auto levels = w_terms(A, B, psi0, u, t, order - 1, c);
    Vector<Scalar> acc = Vector<Scalar>::Zero(psi0.size());
    for (const auto& w : levels) {
      acc += w;
    }
    return acc;
  };

  result.state = sum_levels(cfg);
  DysonConfig fine = cfg;
  fine.grid_points_per_piece = 2 * cfg.grid_points_per_piece;
  result.quadrature_error_estimate = (sum_levels(fine) - result.state).norm();
  result.elapsed = std::chrono::steady_clock::now() - start;
  return result;
}

}  // namespace bcs::dyson
