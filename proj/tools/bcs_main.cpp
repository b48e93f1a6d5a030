// bcs: batch driver for certified bilinear-control propagation and
// reachability nets. See docs/formats.md for file formats and the
// exit-code contract (0 ok, 2 bad input, 3 certificate unreachable).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcs/controls.hpp"
#include "bcs/dyson.hpp"
#include "bcs/errors.hpp"
#include "bcs/linops.hpp"
#include "bcs/oracle.hpp"
#include "bcs/problem.hpp"
#include "bcs/reach.hpp"
#include "bcs/rng.hpp"

using nlohmann::ordered_json;
using namespace bcs;

namespace {

ordered_json scalar_json(double x) { return x; }
ordered_json scalar_json(const Complex& z) {
  return ordered_json::array({z.real(), z.imag()});
}

template <typename Scalar>
ordered_json state_json(const Vector<Scalar>& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(scalar_json(v(i)));
  }
  return out;
}

void emit(const ordered_json& record, const std::string& out_path) {
  const std::string text = record.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    io::write_file(out_path, text);
    std::cout << text;
  }
}

double require_value(const std::optional<double>& flag, const std::optional<double>& file,
                     const std::string& name) {
  if (flag) return *flag;
  if (file) return *file;
  throw InvalidInputError("missing '" + name + "': pass --" + name +
                          " or set it in the problem file");
}

struct PropagateArgs {
  std::string problem;
  std::string method = "dyson";
  std::optional<double> t;
  std::optional<double> eps;
  int grid = 64;
  int max_order = 40;
  int steps = 1024;
  int iterations = 8;
  int picard_grid = 256;
  std::string out;
};

template <typename Scalar>
int run_propagate(const io::Problem<Scalar>& p, const PropagateArgs& args) {
  const auto u = p.control_or_zero();
  const double t = require_value(args.t, p.T, "t");
  ordered_json rec;
  rec["method"] = args.method;
  rec["t"] = t;

  if (args.method == "dyson") {
    const double eps = require_value(args.eps, p.eps, "eps");
    dyson::DysonConfig cfg{args.grid, args.max_order};
    auto result = dyson::propagate_dyson(p.A, p.B, p.psi0, u, t, eps, cfg);
    rec["eps"] = eps;
    rec["state"] = state_json(result.state);
    rec["truncation_order"] = result.truncation_order;
    rec["series_error_bound"] = result.series_error_bound;
    rec["quadrature_error_estimate"] = result.quadrature_error_estimate;
    rec["apriori_bound"] =
        dyson::apriori_bound(t, u.l1_norm_up_to(t), p.psi0.norm(),
                             linops::semigroup_bounds(p.A), linops::operator_norm(p.B));
    rec["elapsed_seconds"] = result.elapsed.count();
  } else if (args.method == "oracle") {
    const auto start = std::chrono::steady_clock::now();
    auto state = oracle::propagate_oracle(p.A, p.B, p.psi0, u, t, args.steps);
    rec["steps"] = args.steps;
    rec["state"] = state_json(state);
    rec["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  } else if (args.method == "picard") {
    const auto start = std::chrono::steady_clock::now();
    auto state = oracle::picard_solution(p.A, p.B, p.psi0, u, t, args.iterations,
                                         args.picard_grid);
    rec["iterations"] = args.iterations;
    rec["grid"] = args.picard_grid;
    rec["state"] = state_json(state);
    rec["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  } else {
    throw InvalidInputError("unknown method '" + args.method + "'");
  }
  emit(rec, args.out);
  return 0;
}

struct TermsArgs {
  std::string problem;
  std::optional<double> t;
  int max_order = 12;
  int grid = 64;
  std::string out;
};

template <typename Scalar>
int run_terms(const io::Problem<Scalar>& p, const TermsArgs& args) {
  const auto u = p.control_or_zero();
  const double t = require_value(args.t, p.T, "t");
  dyson::DysonConfig cfg{args.grid, std::max(args.max_order, 1)};
  auto levels = dyson::w_terms(p.A, p.B, p.psi0, u, t, args.max_order, cfg);
  const auto bounds = linops::semigroup_bounds(p.A);
  const double b_norm = linops::operator_norm(p.B);
  const double l1 = u.l1_norm_up_to(t);

  std::string csv = "p,w_norm,tail_bound\n";
  for (std::size_t order = 0; order < levels.size(); ++order) {
    csv += std::to_string(order) + "," + io::format_double(levels[order].norm()) + "," +
           io::format_double(dyson::tail_bound(static_cast<int>(order), t, l1, bounds,
                                               b_norm) *
                             p.psi0.norm()) +
           "\n";
  }
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    io::write_file(args.out, csv);
  }
  return 0;
}

struct NetArgs {
  std::string problem;
  std::optional<double> eps;
  std::optional<double> T;
  std::optional<double> K;
  int family_size = 200;
  std::optional<std::uint64_t> seed;
  int grid = 32;
  int times = 32;
  int pieces = 1;
  std::size_t budget = 1000000;
  int max_order = 40;
  std::string out;
};

template <typename Scalar>
int run_net(const io::Problem<Scalar>& p, const NetArgs& args) {
  const double eps = require_value(args.eps, p.eps, "eps");
  const double T = require_value(args.T, p.T, "T");
  const double K = require_value(args.K, p.K, "K");
  const std::uint64_t seed = args.seed.value_or(p.seed);
  dyson::DysonConfig cfg{args.grid, args.max_order};

  const auto start = std::chrono::steady_clock::now();
  auto result = reach::build_attainable_net(p.A, p.B, p.psi0, T, K, eps,
                                            args.family_size, seed, cfg, args.times,
                                            args.pieces, args.budget);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!args.out.empty()) {
    io::save_net(args.out, io::AnyNet{result.net});
  }
  ordered_json rec;
  rec["n_centers"] = result.net.centers.size();
  rec["radius"] = result.net.radius;
  rec["N_eps"] = result.truncation_order;
  rec["in_sample_coverage"] = result.in_sample_coverage;
  rec["sample_count"] = result.sample_count;
  rec["max_in_sample_distance"] = result.max_in_sample_distance;
  rec["renetted"] = result.renetted;
  rec["elapsed_seconds"] = elapsed;
  std::cout << rec.dump(2) + "\n";
  return 0;
}

struct CoverArgs {
  std::string problem;
  std::vector<double> eps_ladder;
  std::optional<double> T;
  std::optional<double> K;
  int family_size = 200;
  std::optional<std::uint64_t> seed;
  int grid = 32;
  int times = 32;
  int pieces = 1;
  int max_order = 40;
  std::string out;
};

template <typename Scalar>
int run_cover(const io::Problem<Scalar>& p, const CoverArgs& args) {
  if (args.eps_ladder.empty()) {
    throw InvalidInputError("cover: pass at least one --eps");
  }
  const double T = require_value(args.T, p.T, "T");
  const double K = require_value(args.K, p.K, "K");
  const std::uint64_t seed = args.seed.value_or(p.seed);
  dyson::DysonConfig cfg{args.grid, args.max_order};

  // Sample the attainable cloud once, at the truncation demanded by the
  // tightest rung of the ladder, then net it at every rung.
  const double eps_min = *std::min_element(args.eps_ladder.begin(), args.eps_ladder.end());
  const auto bounds = linops::semigroup_bounds(p.A);
  const double b_norm = linops::operator_norm(p.B);
  const double t_sup = bounds.omega >= 0.0 ? T : 0.0;
  const int order = dyson::choose_truncation(eps_min, t_sup, K, p.psi0.norm(), bounds,
                                             b_norm, cfg.max_order);
  const auto family = controls::control_family(T, K, args.pieces, args.family_size, seed);

  std::vector<Vector<Scalar>> cloud;
  {
    auto layer0 = reach::sample_w_set(p.A, p.B, p.psi0, 0, T, K, args.times, family, cfg);
    cloud.resize(layer0.size(), Vector<Scalar>::Zero(p.psi0.size()));
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      cloud[i] = layer0[i];
    }
    for (int j = 1; j <= order; ++j) {
      auto layer = reach::sample_w_set(p.A, p.B, p.psi0, j, T, K, args.times, family, cfg);
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        cloud[i] += layer[i];
      }
    }
  }

  std::string csv = "eps,n_centers\n";
  for (double eps : args.eps_ladder) {
    csv += io::format_double(eps) + "," +
           std::to_string(reach::covering_number(cloud, eps)) + "\n";
  }
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    io::write_file(args.out, csv);
  }
  return 0;
}

struct ObstructArgs {
  std::string net;
  int targets = 200;
  std::uint64_t seed = 0;
  bool targets_from_centers = false;
  std::string out;
};

template <typename Scalar>
int run_obstruct(const reach::EpsNet<Scalar>& net, const ObstructArgs& args) {
  if (net.centers.empty()) {
    throw InvalidInputError("obstruct: net file has no centers");
  }
  std::vector<Vector<Scalar>> targets;
  if (args.targets_from_centers) {
    targets = net.centers;
  } else {
    targets = reach::unit_sphere_targets<Scalar>(net.centers.front().size(),
                                                 args.targets, args.seed);
  }
  auto distances = reach::obstruction_report(net, targets);

  std::string csv = "target,distance\n";
  for (std::size_t i = 0; i < distances.size(); ++i) {
    csv += std::to_string(i) + "," + io::format_double(distances[i]) + "\n";
  }
  if (args.out.empty()) {
    std::cout << csv;
    return 0;
  }
  io::write_file(args.out, csv);

  std::vector<double> sorted = distances;
  std::sort(sorted.begin(), sorted.end());
  ordered_json rec;
  rec["n_targets"] = distances.size();
  rec["median_distance"] =
      sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
  rec["max_distance"] = sorted.empty() ? 0.0 : sorted.back();
  std::cout << rec.dump(2) + "\n";
  return 0;
}

io::AnyProblem make_case(const std::string& name, int dim, std::uint64_t seed) {
  if (name == "rotation") {
    io::Problem<double> p;
    p.dim = 2;
    p.A = Matrix<double>(2, 2);
    p.A << 0.0, -1.0, 1.0, 0.0;
    p.B = Matrix<double>::Identity(2, 2);
    p.psi0 = Vector<double>(2);
    p.psi0 << 1.0, 0.0;
    p.control = controls::PiecewiseConstantControl({0.0, 2.0}, {0.5});
    p.T = 2.0;
    p.K = 1.0;
    p.eps = 1e-8;
    p.seed = seed;
    return p;
  }
  if (name == "scalar") {
    io::Problem<double> p;
    p.dim = 1;
    p.A = Matrix<double>(1, 1);
    p.A << 1.0;
    p.B = Matrix<double>(1, 1);
    p.B << 2.0;
    p.psi0 = Vector<double>(1);
    p.psi0 << 1.0;
    p.control = controls::PiecewiseConstantControl({0.0, 1.0}, {1.0});
    p.T = 1.0;
    p.K = 2.0;
    p.eps = 1e-8;
    p.seed = seed;
    return p;
  }
  if (name == "shear") {
    io::Problem<double> p;
    p.dim = 2;
    p.A = Matrix<double>(2, 2);
    p.A << 0.0, 1.0, 0.0, 0.0;
    p.B = Matrix<double>(2, 2);
    p.B << 0.0, 0.0, 1.0, 0.0;
    p.psi0 = Vector<double>(2);
    p.psi0 << 1.0, 0.0;
    p.control = controls::PiecewiseConstantControl({0.0, 1.0}, {1.0});
    p.T = 1.0;
    p.K = 1.0;
    p.eps = 1e-6;
    p.seed = seed;
    return p;
  }
  if (name == "obstruction") {
    // Weakly driven skew system: the attainable cloud hugs a thin
    // neighborhood of the free orbit, which is what the demo probes.
    io::Problem<double> p;
    p.dim = dim;
    std::mt19937_64 gen(seed);
    Matrix<double> g(dim, dim), h(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        g(r, c) = rng::uniform(gen, -1.0, 1.0);
        h(r, c) = rng::uniform(gen, -1.0, 1.0);
      }
    }
    p.A = (g - g.transpose()) / 2.0;
    p.A /= linops::operator_norm(p.A);
    p.B = 0.3 * h / linops::operator_norm(h);
    p.psi0 = Vector<double>::Zero(dim);
    p.psi0(0) = 1.0;
    p.T = 1.0;
    p.K = 1.0;
    p.eps = 0.1;
    p.seed = seed;
    return p;
  }
  if (name == "schrodinger") {
    io::Problem<Complex> p;
    p.dim = 4;
    Matrix<Complex> h = Matrix<Complex>::Zero(4, 4);
    Matrix<Complex> w = Matrix<Complex>::Zero(4, 4);
    for (int k = 0; k < 4; ++k) {
      h(k, k) = Complex(static_cast<double>(k), 0.0);
    }
    for (int k = 0; k + 1 < 4; ++k) {
      w(k, k + 1) = Complex(1.0, 0.0);
      w(k + 1, k) = Complex(1.0, 0.0);
    }
    p.A = Complex(0.0, -1.0) * h;
    p.B = Complex(0.0, -1.0) * w;
    p.psi0 = Vector<Complex>::Zero(4);
    p.psi0(0) = Complex(1.0, 0.0);
    p.control = controls::PiecewiseConstantControl({0.0, 0.5, 1.0}, {0.8, -0.8});
    p.T = 1.0;
    p.K = 1.0;
    p.eps = 1e-6;
    p.seed = seed;
    return p;
  }
  throw InvalidInputError("unknown case '" + name +
                          "' (rotation|scalar|shear|obstruction|schrodinger)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified Dyson propagation and eps-net reachability toolkit for "
               "bilinear control systems"};
  app.require_subcommand(1);

  PropagateArgs prop;
  auto* cmd_prop = app.add_subcommand("propagate", "Propagate a problem file to time t");
  cmd_prop->add_option("--problem", prop.problem, "problem JSON file")->required();
  cmd_prop->add_option("--t", prop.t, "final time (defaults to problem T)");
  cmd_prop->add_option("--eps", prop.eps, "certified series budget (dyson)");
  cmd_prop->add_option("--method", prop.method, "dyson|oracle|picard")
      ->check(CLI::IsMember({"dyson", "oracle", "picard"}));
  cmd_prop->add_option("--grid", prop.grid, "RK4 steps per control piece (dyson)");
  cmd_prop->add_option("--max-order", prop.max_order, "truncation order cap (dyson)");
  cmd_prop->add_option("--steps", prop.steps, "RK4 steps per piece (oracle)");
  cmd_prop->add_option("--iterations", prop.iterations, "Picard sweeps");
  cmd_prop->add_option("--picard-grid", prop.picard_grid, "Picard quadrature intervals");
  cmd_prop->add_option("--out", prop.out, "also write the record to this file");

  TermsArgs terms;
  auto* cmd_terms = app.add_subcommand("terms", "Dump per-order norms against the factorial bound");
  cmd_terms->add_option("--problem", terms.problem, "problem JSON file")->required();
  cmd_terms->add_option("--t", terms.t, "final time (defaults to problem T)");
  cmd_terms->add_option("--max-order", terms.max_order, "highest order to compute");
  cmd_terms->add_option("--grid", terms.grid, "RK4 steps per control piece");
  cmd_terms->add_option("--out", terms.out, "write CSV here instead of stdout");

  NetArgs net;
  auto* cmd_net = app.add_subcommand("net", "Build a certified attainable-set net");
  cmd_net->add_option("--problem", net.problem, "problem JSON file")->required();
  cmd_net->add_option("--eps", net.eps, "net radius budget");
  cmd_net->add_option("--T", net.T, "time horizon");
  cmd_net->add_option("--K", net.K, "control L1 budget");
  cmd_net->add_option("--family-size", net.family_size, "number of sampled controls");
  cmd_net->add_option("--seed", net.seed, "sampling seed (defaults to problem seed)");
  cmd_net->add_option("--grid", net.grid, "RK4 steps per control piece");
  cmd_net->add_option("--times", net.times, "time samples per control");
  cmd_net->add_option("--pieces", net.pieces, "pieces per sampled control");
  cmd_net->add_option("--budget", net.budget, "Minkowski product cap");
  cmd_net->add_option("--max-order", net.max_order, "truncation order cap");
  cmd_net->add_option("--out", net.out, "write net CSV here");

  CoverArgs cover;
  auto* cmd_cover = app.add_subcommand("cover", "Covering-number ladder of the sampled attainable cloud");
  cmd_cover->add_option("--problem", cover.problem, "problem JSON file")->required();
  cmd_cover->add_option("--eps", cover.eps_ladder, "ladder rung (repeatable)");
  cmd_cover->add_option("--T", cover.T, "time horizon");
  cmd_cover->add_option("--K", cover.K, "control L1 budget");
  cmd_cover->add_option("--family-size", cover.family_size, "number of sampled controls");
  cmd_cover->add_option("--seed", cover.seed, "sampling seed");
  cmd_cover->add_option("--grid", cover.grid, "RK4 steps per control piece");
  cmd_cover->add_option("--times", cover.times, "time samples per control");
  cmd_cover->add_option("--pieces", cover.pieces, "pieces per sampled control");
  cmd_cover->add_option("--max-order", cover.max_order, "truncation order cap");
  cmd_cover->add_option("--out", cover.out, "write CSV here instead of stdout");

  ObstructArgs obstruct;
  auto* cmd_obs = app.add_subcommand("obstruct", "Distances from sphere targets to a net");
  cmd_obs->add_option("--net", obstruct.net, "net CSV file")->required();
  cmd_obs->add_option("--targets", obstruct.targets, "number of unit-sphere targets");
  cmd_obs->add_option("--seed", obstruct.seed, "target seed");
  cmd_obs->add_flag("--targets-from-centers", obstruct.targets_from_centers,
                    "debug mode: use the net centers as targets");
  cmd_obs->add_option("--out", obstruct.out, "write CSV here (summary goes to stdout)");

  std::string gen_case, gen_out;
  int gen_dim = 20;
  std::uint64_t gen_seed = 7;
  auto* cmd_gen = app.add_subcommand("gen", "Write an example problem file");
  cmd_gen->add_option("--case", gen_case, "rotation|scalar|shear|obstruction|schrodinger")
      ->required();
  cmd_gen->add_option("--out", gen_out, "output problem file")->required();
  cmd_gen->add_option("--dim", gen_dim, "dimension (obstruction case)");
  cmd_gen->add_option("--seed", gen_seed, "seed stored in the file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_prop->parsed()) {
      return std::visit([&](const auto& p) { return run_propagate(p, prop); },
                        io::load_problem(prop.problem));
    }
    if (cmd_terms->parsed()) {
      return std::visit([&](const auto& p) { return run_terms(p, terms); },
                        io::load_problem(terms.problem));
    }
    if (cmd_net->parsed()) {
      return std::visit([&](const auto& p) { return run_net(p, net); },
                        io::load_problem(net.problem));
    }
    if (cmd_cover->parsed()) {
      return std::visit([&](const auto& p) { return run_cover(p, cover); },
                        io::load_problem(cover.problem));
    }
    if (cmd_obs->parsed()) {
      return std::visit([&](const auto& n) { return run_obstruct(n, obstruct); },
                        io::load_net(obstruct.net));
    }
    if (cmd_gen->parsed()) {
      io::save_problem(gen_out, make_case(gen_case, gen_dim, gen_seed));
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }
  } catch (const CertificateUnreachableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
