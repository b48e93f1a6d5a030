#include "bcs/controls.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcs/errors.hpp"
#include "bcs/rng.hpp"

namespace bcs::controls {

PiecewiseConstantControl::PiecewiseConstantControl(std::vector<double> breakpoints,
                                                   std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.empty() || breakpoints_.front() != 0.0) {
    throw InvalidInputError("control breakpoints must start at 0");
  }
  if (values_.size() + 1 != breakpoints_.size()) {
    throw InvalidInputError("control needs one value per interval: got " +
                            std::to_string(values_.size()) + " values for " +
                            std::to_string(breakpoints_.size()) + " breakpoints");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i])) {
      throw InvalidInputError("control breakpoints must be finite");
    }
    if (i > 0 && breakpoints_[i] <= breakpoints_[i - 1]) {
      throw InvalidInputError("control breakpoints must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw InvalidInputError("control values must be finite");
    }
  }
}

double PiecewiseConstantControl::eval(double t) const {
  if (t < 0.0 || std::isnan(t)) {
    throw InvalidInputError("control eval: t must be >= 0");
  }
  if (t >= breakpoints_.back()) {
    return 0.0;
  }
  // First breakpoint strictly greater than t; t lives in the interval
  // ending there. upper_bound never returns begin() since t >= 0 = b_0.
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double PiecewiseConstantControl::l1_norm() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    acc += std::abs(values_[i]) * (breakpoints_[i + 1] - breakpoints_[i]);
  }
  return acc;
}

double PiecewiseConstantControl::l1_norm_up_to(double t) const {
  if (t < 0.0 || std::isnan(t)) {
    throw InvalidInputError("l1_norm_up_to: t must be >= 0");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double lo = breakpoints_[i];
    double hi = std::min(breakpoints_[i + 1], t);
    if (hi <= lo) break;
    acc += std::abs(values_[i]) * (hi - lo);
  }
  return acc;
}

double PiecewiseConstantControl::integral_up_to(double t) const {
  if (t < 0.0 || std::isnan(t)) {
    throw InvalidInputError("integral_up_to: t must be >= 0");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double lo = breakpoints_[i];
    double hi = std::min(breakpoints_[i + 1], t);
    if (hi <= lo) break;
    acc += values_[i] * (hi - lo);
  }
  return acc;
}

std::vector<PiecewiseConstantControl> control_family(double T, double K, int n_pieces,
                                                     int count, std::uint64_t seed) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw InvalidInputError("control_family: T must be positive and finite");
  }
  if (!(K >= 0.0) || !std::isfinite(K)) {
    throw InvalidInputError("control_family: K must be >= 0 and finite");
  }
  if (n_pieces < 1) {
    throw InvalidInputError("control_family: n_pieces must be >= 1");
  }
  if (count < 1) {
    throw InvalidInputError("control_family: count must be >= 1");
  }

  const auto n = static_cast<std::size_t>(n_pieces);
  std::vector<double> grid(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    grid[i] = T * static_cast<double>(i) / static_cast<double>(n);
  }
  grid[0] = 0.0;
  const double piece_len = T / static_cast<double>(n_pieces);

  std::mt19937_64 gen(seed);
  std::vector<PiecewiseConstantControl> family;
  family.reserve(static_cast<std::size_t>(count));

  // Member 0: the zero control on the same grid.
  family.emplace_back(grid, std::vector<double>(n, 0.0));

  // Member 1: constant control saturating the budget, sign from the seed.
  if (count >= 2) {
    const double sign = (gen() & 1u) ? 1.0 : -1.0;
    family.emplace_back(grid, std::vector<double>(n, sign * K / T));
  }

  while (family.size() < static_cast<std::size_t>(count)) {
    std::vector<double> values(n);
    double raw_l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = rng::uniform(gen, -1.0, 1.0);
      raw_l1 += std::abs(values[i]) * piece_len;
    }
    const double fraction = rng::uniform01(gen);
    const double scale = (raw_l1 > 0.0) ? fraction * K / raw_l1 : 0.0;
    for (double& v : values) {
      v *= scale;
    }
    family.emplace_back(grid, std::move(values));
  }
  return family;
}

}  // namespace bcs::controls
