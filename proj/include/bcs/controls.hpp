#pragma once

#include <cstdint>
#include <vector>

namespace bcs::controls {

/// Scalar control that is constant on half-open intervals
/// [b_i, b_{i+1}) and identically zero from the last breakpoint on.
/// Exactly integrable, which removes one quadrature-error source from
/// every propagator built on top of it.
class PiecewiseConstantControl {
 public:
  /// breakpoints: strictly increasing, first element 0, all finite.
  /// values: one per interval, so values.size() == breakpoints.size() - 1.
  PiecewiseConstantControl(std::vector<double> breakpoints, std::vector<double> values);

  /// Zero control (single breakpoint at 0, no pieces).
  PiecewiseConstantControl() : breakpoints_{0.0} {}

  /// Value at time t >= 0 under the half-open convention; 0 past support.
  double eval(double t) const;

  /// Exact L1 norm: sum of |value_i| * piece length.
  double l1_norm() const;

  /// Exact L1 norm restricted to [0, t].
  double l1_norm_up_to(double t) const;

  /// Exact signed integral over [0, t].
  double integral_up_to(double t) const;

  /// Last breakpoint; the control vanishes from here on.
  double support_end() const { return breakpoints_.back(); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const PiecewiseConstantControl& other) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Deterministic family of `count` controls supported on [0, T] with
/// n_pieces uniform pieces and l1_norm <= K. Always contains the zero
/// control and one constant control of norm exactly K (boundary member).
/// Remaining members draw piece values uniform in [-1, 1], then rescale
/// to a uniform fraction of the norm budget.
std::vector<PiecewiseConstantControl> control_family(double T, double K, int n_pieces,
                                                     int count, std::uint64_t seed);

}  // namespace bcs::controls
