#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bcs/controls.hpp"
#include "bcs/linops.hpp"
#include "bcs/reach.hpp"

// Problem files are single JSON documents; nets and reports are CSV.
// Complex scalars serialize as [re, im] pairs. See docs/formats.md.

namespace bcs::io {

enum class ScalarField { real, complex_field };

std::string to_string(ScalarField field);
ScalarField field_from_string(const std::string& name);

template <typename Scalar>
struct Problem {
  int dim = 0;
  Matrix<Scalar> A;
  Matrix<Scalar> B;
  Vector<Scalar> psi0;
  std::optional<controls::PiecewiseConstantControl> control;
  std::optional<double> T;
  std::optional<double> K;
  std::optional<double> eps;
  std::uint64_t seed = 0;

  /// The control to propagate with: the stored one, or u == 0.
  controls::PiecewiseConstantControl control_or_zero() const {
    return control.value_or(controls::PiecewiseConstantControl{});
  }
};

using AnyProblem = std::variant<Problem<double>, Problem<Complex>>;

/// Parse a problem document; throws InvalidInputError on malformed or
/// inconsistent input (shape mismatches, non-finite entries, bad field).
AnyProblem parse_problem(const std::string& json_text);
AnyProblem load_problem(const std::string& path);

std::string problem_to_json(const Problem<double>& problem);
std::string problem_to_json(const Problem<Complex>& problem);
void save_problem(const std::string& path, const AnyProblem& problem);

using AnyNet = std::variant<reach::EpsNet<double>, reach::EpsNet<Complex>>;

/// One center per row; complex centers interleave re,im columns. The
/// leading comment line carries dim/field/radius/source_count metadata.
std::string net_to_csv(const reach::EpsNet<double>& net);
std::string net_to_csv(const reach::EpsNet<Complex>& net);
void save_net(const std::string& path, const AnyNet& net);
AnyNet parse_net_csv(const std::string& text);
AnyNet load_net(const std::string& path);

/// Fixed-format float that round-trips doubles exactly.
std::string format_double(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace bcs::io
