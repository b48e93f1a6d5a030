#pragma once

#include <stdexcept>
#include <string>

namespace bcs {

/// Thrown when inputs violate a documented precondition (bad shapes,
/// non-finite entries, malformed files, out-of-range parameters).
class InvalidInputError : public std::runtime_error {
 public:
  explicit InvalidInputError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an integration produces a non-finite intermediate.
class OverflowError : public std::runtime_error {
 public:
  OverflowError(const std::string& what, int order)
      : std::runtime_error(what), order_(order) {}

  /// Hierarchy order at which the first non-finite value appeared
  /// (-1 when the overflow is not attributable to a specific order).
  int order() const noexcept { return order_; }

 private:
  int order_;
};

/// Thrown when no truncation order within the configured cap meets the
/// requested error budget. Carries the bound that *is* achievable so
/// callers can report how far off the request was.
class CertificateUnreachableError : public std::runtime_error {
 public:
  CertificateUnreachableError(const std::string& what, double achievable_bound,
                              int max_order)
      : std::runtime_error(what),
        achievable_bound_(achievable_bound),
        max_order_(max_order) {}

  double achievable_bound() const noexcept { return achievable_bound_; }
  int max_order() const noexcept { return max_order_; }

 private:
  double achievable_bound_;
  int max_order_;
};

/// Thrown when a partition-of-unity query point lies outside every
/// delta-ball of the cover, so the raw weight sum could vanish.
class UncoveredPointError : public std::runtime_error {
 public:
  explicit UncoveredPointError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bcs
