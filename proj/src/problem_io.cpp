#include "bcs/problem.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bcs/errors.hpp"

namespace bcs::io {

using nlohmann::ordered_json;

std::string to_string(ScalarField field) {
  return field == ScalarField::real ? "real" : "complex";
}

ScalarField field_from_string(const std::string& name) {
  if (name == "real") return ScalarField::real;
  if (name == "complex") return ScalarField::complex_field;
  throw InvalidInputError("unknown scalar field '" + name + "' (expected real|complex)");
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidInputError("cannot open file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InvalidInputError("cannot write file: " + path);
  }
  out << content;
  if (!out) {
    throw InvalidInputError("write failed: " + path);
  }
}

namespace {

double parse_finite_number(const ordered_json& node, const std::string& what) {
  if (!node.is_number()) {
    throw InvalidInputError(what + " must be a number");
  }
  const double value = node.get<double>();
  if (!std::isfinite(value)) {
    throw InvalidInputError(what + " must be finite");
  }
  return value;
}

double parse_scalar_entry(const ordered_json& node, const std::string& what, double) {
  return parse_finite_number(node, what);
}

Complex parse_scalar_entry(const ordered_json& node, const std::string& what, Complex) {
  if (!node.is_array() || node.size() != 2) {
    throw InvalidInputError(what + " must be a [re, im] pair");
  }
  return Complex(parse_finite_number(node[0], what + "[re]"),
                 parse_finite_number(node[1], what + "[im]"));
}

template <typename Scalar>
Matrix<Scalar> parse_matrix(const ordered_json& node, int dim, const std::string& what) {
  if (!node.is_array() || static_cast<int>(node.size()) != dim) {
    throw InvalidInputError(what + " must be an array of " + std::to_string(dim) + " rows");
  }
  Matrix<Scalar> m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto& row = node[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw InvalidInputError(what + " row " + std::to_string(r) + " must have " +
                              std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) {
      m(r, c) = parse_scalar_entry(row[static_cast<std::size_t>(c)],
                                   what + "[" + std::to_string(r) + "][" +
                                       std::to_string(c) + "]",
                                   Scalar{});
    }
  }
  return m;
}

template <typename Scalar>
Vector<Scalar> parse_vector(const ordered_json& node, int dim, const std::string& what) {
  if (!node.is_array() || static_cast<int>(node.size()) != dim) {
    throw InvalidInputError(what + " must be an array of " + std::to_string(dim) +
                            " entries");
  }
  Vector<Scalar> v(dim);
  for (int i = 0; i < dim; ++i) {
    v(i) = parse_scalar_entry(node[static_cast<std::size_t>(i)],
                              what + "[" + std::to_string(i) + "]", Scalar{});
  }
  return v;
}

std::vector<double> parse_double_list(const ordered_json& node, const std::string& what) {
  if (!node.is_array()) {
    throw InvalidInputError(what + " must be an array");
  }
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(parse_finite_number(node[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename Scalar>
Problem<Scalar> parse_typed(const ordered_json& doc, int dim) {
  Problem<Scalar> p;
  p.dim = dim;
  p.A = parse_matrix<Scalar>(doc.at("A"), dim, "A");
  p.B = parse_matrix<Scalar>(doc.at("B"), dim, "B");
  p.psi0 = parse_vector<Scalar>(doc.at("psi0"), dim, "psi0");
  if (doc.contains("control") && !doc["control"].is_null()) {
    const auto& ctrl = doc["control"];
    if (!ctrl.is_object()) {
      throw InvalidInputError("control must be an object");
    }
    p.control = controls::PiecewiseConstantControl(
        parse_double_list(ctrl.at("breakpoints"), "control.breakpoints"),
        parse_double_list(ctrl.at("values"), "control.values"));
  }
  for (const char* key : {"T", "K", "eps"}) {
    if (doc.contains(key) && !doc[key].is_null()) {
      const double value = parse_finite_number(doc[key], key);
      if (key[0] == 'T') p.T = value;
      if (key[0] == 'K') p.K = value;
      if (key[0] == 'e') p.eps = value;
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) {
      throw InvalidInputError("seed must be a non-negative integer");
    }
    p.seed = doc["seed"].get<std::uint64_t>();
  }
  return p;
}

ordered_json scalar_to_json(double x) { return x; }

ordered_json scalar_to_json(const Complex& z) {
  return ordered_json::array({z.real(), z.imag()});
}

template <typename Scalar>
ordered_json matrix_to_json(const Matrix<Scalar>& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(scalar_to_json(m(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Scalar>
ordered_json vector_to_json(const Vector<Scalar>& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(scalar_to_json(v(i)));
  }
  return out;
}

template <typename Scalar>
std::string problem_to_json_impl(const Problem<Scalar>& p, ScalarField field) {
  ordered_json doc;
  doc["dim"] = p.dim;
  doc["field"] = to_string(field);
  doc["A"] = matrix_to_json(p.A);
  doc["B"] = matrix_to_json(p.B);
  doc["psi0"] = vector_to_json(p.psi0);
  if (p.control) {
    doc["control"] = {{"breakpoints", p.control->breakpoints()},
                      {"values", p.control->values()}};
  }
  if (p.T) doc["T"] = *p.T;
  if (p.K) doc["K"] = *p.K;
  if (p.eps) doc["eps"] = *p.eps;
  doc["seed"] = p.seed;
  return doc.dump(2) + "\n";
}

}  // namespace

AnyProblem parse_problem(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("problem file is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) {
      throw InvalidInputError("problem file must be a JSON object");
    }
    if (!doc.contains("dim") || !doc["dim"].is_number_integer()) {
      throw InvalidInputError("problem file needs an integer 'dim'");
    }
    const int dim = doc["dim"].get<int>();
    if (dim < 1) {
      throw InvalidInputError("dim must be >= 1");
    }
    const ScalarField field =
        doc.contains("field") ? field_from_string(doc["field"].get<std::string>())
                              : ScalarField::real;
    if (field == ScalarField::real) {
      return parse_typed<double>(doc, dim);
    }
    return parse_typed<Complex>(doc, dim);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("malformed problem file: ") + e.what());
  }
}

AnyProblem load_problem(const std::string& path) { return parse_problem(read_file(path)); }

std::string problem_to_json(const Problem<double>& problem) {
  return problem_to_json_impl(problem, ScalarField::real);
}

std::string problem_to_json(const Problem<Complex>& problem) {
  return problem_to_json_impl(problem, ScalarField::complex_field);
}

void save_problem(const std::string& path, const AnyProblem& problem) {
  std::visit([&](const auto& p) { write_file(path, problem_to_json(p)); }, problem);
}

namespace {

template <typename Scalar>
std::string net_to_csv_impl(const reach::EpsNet<Scalar>& net, ScalarField field,
                            Eigen::Index dim) {
  std::ostringstream out;
  out << "# bcs-net dim=" << dim << " field=" << to_string(field)
      << " radius=" << format_double(net.radius)
      << " source_count=" << net.source_count << "\n";
  for (Eigen::Index c = 0; c < dim; ++c) {
    if constexpr (is_complex_v<Scalar>) {
      out << (c ? "," : "") << "re" << c << ",im" << c;
    } else {
      out << (c ? "," : "") << "c" << c;
    }
  }
  out << "\n";
  for (const auto& center : net.centers) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      if constexpr (is_complex_v<Scalar>) {
        out << (c ? "," : "") << format_double(center(c).real()) << ","
            << format_double(center(c).imag());
      } else {
        out << (c ? "," : "") << format_double(center(c));
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string header_value(const std::string& header, const std::string& key) {
  const std::string token = key + "=";
  const auto pos = header.find(token);
  if (pos == std::string::npos) {
    throw InvalidInputError("net file header is missing '" + key + "'");
  }
  auto end = header.find(' ', pos);
  if (end == std::string::npos) end = header.size();
  return header.substr(pos + token.size(), end - pos - token.size());
}

std::vector<double> split_csv_row(const std::string& line, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto comma = line.find(',', start);
    if (comma == std::string::npos) comma = line.size();
    const std::string cell = line.substr(start, comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) {
        throw std::invalid_argument(cell);
      }
    } catch (const std::exception&) {
      throw InvalidInputError(what + ": bad numeric cell '" + cell + "'");
    }
    start = comma + 1;
    if (comma == line.size()) break;
  }
  return out;
}

template <typename Scalar>
reach::EpsNet<Scalar> parse_net_body(const std::vector<std::string>& lines, int dim,
                                     double radius, std::size_t source_count) {
  constexpr int per_entry = is_complex_v<Scalar> ? 2 : 1;
  reach::EpsNet<Scalar> net;
  net.radius = radius;
  net.source_count = source_count;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_csv_row(lines[i], "net row " + std::to_string(i));
    if (static_cast<int>(cells.size()) != dim * per_entry) {
      throw InvalidInputError("net row " + std::to_string(i) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(dim * per_entry));
    }
    Vector<Scalar> center(dim);
    for (int c = 0; c < dim; ++c) {
      if constexpr (is_complex_v<Scalar>) {
        center(c) = Complex(cells[static_cast<std::size_t>(2 * c)],
                            cells[static_cast<std::size_t>(2 * c + 1)]);
      } else {
        center(c) = cells[static_cast<std::size_t>(c)];
      }
    }
    net.centers.push_back(std::move(center));
  }
  return net;
}

}  // namespace

std::string net_to_csv(const reach::EpsNet<double>& net) {
  const Eigen::Index dim = net.centers.empty() ? 0 : net.centers.front().size();
  return net_to_csv_impl(net, ScalarField::real, dim);
}

std::string net_to_csv(const reach::EpsNet<Complex>& net) {
  const Eigen::Index dim = net.centers.empty() ? 0 : net.centers.front().size();
  return net_to_csv_impl(net, ScalarField::complex_field, dim);
}

void save_net(const std::string& path, const AnyNet& net) {
  std::visit([&](const auto& n) { write_file(path, net_to_csv(n)); }, net);
}

AnyNet parse_net_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.size() < 2 || lines[0].rfind("# bcs-net", 0) != 0) {
    throw InvalidInputError("not a net file: missing '# bcs-net' header");
  }
  int dim = 0;
  double radius = 0.0;
  std::size_t source_count = 0;
  try {
    dim = std::stoi(header_value(lines[0], "dim"));
    radius = std::stod(header_value(lines[0], "radius"));
    source_count = std::stoull(header_value(lines[0], "source_count"));
  } catch (const std::exception& e) {
    throw InvalidInputError(std::string("bad net file header: ") + e.what());
  }
  if (dim < 1) {
    throw InvalidInputError("net file header: dim must be >= 1");
  }
  const ScalarField field = field_from_string(header_value(lines[0], "field"));
  if (field == ScalarField::real) {
    return parse_net_body<double>(lines, dim, radius, source_count);
  }
  return parse_net_body<Complex>(lines, dim, radius, source_count);
}

AnyNet load_net(const std::string& path) { return parse_net_csv(read_file(path)); }

}  // namespace bcs::io
