#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "bcs/controls.hpp"
#include "bcs/dyson.hpp"
#include "bcs/errors.hpp"
#include "bcs/linops.hpp"
#include "bcs/rng.hpp"

// Constructive side of the compactness argument: finite eps-nets for the
// sampled Dyson-layer sets, hat-function partitions of unity with the
// 2*delta reconstruction guarantee, Minkowski sums of nets with explicit
// radius accounting, and the attainable-set net behind the
// non-controllability demonstration.

namespace bcs::reach {

using controls::PiecewiseConstantControl;

/// Finite cover certificate: every source point lies within `radius` of
/// some center. Nets built greedily additionally pack: pairwise center
/// distances exceed `radius`.
template <typename Scalar>
struct EpsNet {
  std::vector<Vector<Scalar>> centers;
  double radius = 0.0;
  std::size_t source_count = 0;
};

/// Ball cover with hat-profile weights (1 inside delta, linear ramp to 0
/// at 2*delta, normalized over the cover).
template <typename Scalar>
struct PartitionOfUnity {
  std::vector<Vector<Scalar>> centers;
  double delta = 0.0;
};

namespace detail {

template <typename Scalar>
struct GreedyNet {
  EpsNet<Scalar> net;
  /// For every source point, index of the certifying center.
  std::vector<std::size_t> assignment;
};

template <typename Scalar>
GreedyNet<Scalar> greedy_eps_net_with_assignment(const std::vector<Vector<Scalar>>& points,
                                                 double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidInputError("greedy_eps_net: eps must be positive and finite");
  }
  GreedyNet<Scalar> result;
  result.net.radius = eps;
  result.net.source_count = points.size();
  result.assignment.reserve(points.size());
  for (const auto& p : points) {
    std::size_t found = result.net.centers.size();
    for (std::size_t c = 0; c < result.net.centers.size(); ++c) {
      if ((p - result.net.centers[c]).norm() <= eps) {
        found = c;
        break;
      }
    }
    if (found == result.net.centers.size()) {
      result.net.centers.push_back(p);
    }
    result.assignment.push_back(found);
  }
  return result;
}

}  // namespace detail

/// Greedy admission scan in point order: a point becomes a center iff it
/// lies strictly further than eps from every existing center, so the
/// scan itself certifies the cover and the packing.
template <typename Scalar>
EpsNet<Scalar> greedy_eps_net(const std::vector<Vector<Scalar>>& points, double eps) {
  return detail::greedy_eps_net_with_assignment(points, eps).net;
}

/// Number of balls the greedy cover uses at scale eps (an upper bound on
/// the covering number and, by packing, a lower bound at scale eps/2).
template <typename Scalar>
std::size_t covering_number(const std::vector<Vector<Scalar>>& points, double eps) {
  return greedy_eps_net(points, eps).centers.size();
}

/// Normalized hat weights of the cover at x. The covering hypothesis
/// (x inside some open delta-ball) is enforced; weights vanish exactly
/// from 2*delta on.
template <typename Scalar>
std::vector<double> partition_weights(const PartitionOfUnity<Scalar>& pou,
                                      const Vector<Scalar>& x) {
  if (pou.centers.empty() || !(pou.delta > 0.0)) {
    throw InvalidInputError("partition_weights: need centers and delta > 0");
  }
  std::vector<double> weights(pou.centers.size(), 0.0);
  double total = 0.0;
  bool covered = false;
  for (std::size_t j = 0; j < pou.centers.size(); ++j) {
    if (pou.centers[j].size() != x.size()) {
      throw InvalidInputError("partition_weights: dimension mismatch");
    }
    const double d = (x - pou.centers[j]).norm();
    if (d < pou.delta) {
      covered = true;
      weights[j] = 1.0;
    } else if (d < 2.0 * pou.delta) {
      weights[j] = 2.0 - d / pou.delta;
    }
    total += weights[j];
  }
  if (!covered) {
    throw UncoveredPointError(
        "partition_weights: x lies outside every delta-ball of the cover");
  }
  for (double& w : weights) {
    w /= total;
  }
  return weights;
}

namespace detail {

template <typename Scalar>
struct MinkowskiFold {
  EpsNet<Scalar> net;
  bool renetted = false;
};

template <typename Scalar>
MinkowskiFold<Scalar> minkowski_fold(const std::vector<EpsNet<Scalar>>& nets,
                                     std::size_t budget) {
  if (nets.empty()) {
    throw InvalidInputError("minkowski_sum_net: need at least one net");
  }
  if (budget < 1) {
    throw InvalidInputError("minkowski_sum_net: budget must be >= 1");
  }
  const Eigen::Index dim = nets.front().centers.empty()
                               ? 0
                               : nets.front().centers.front().size();
  for (const auto& net : nets) {
    for (const auto& c : net.centers) {
      if (c.size() != dim) {
        throw InvalidInputError("minkowski_sum_net: center dimension mismatch");
      }
    }
  }

  MinkowskiFold<Scalar> fold;
  fold.net.centers = nets.front().centers;
  fold.net.radius = nets.front().radius;
  double source_product = static_cast<double>(nets.front().centers.size());

  for (std::size_t i = 1; i < nets.size(); ++i) {
    const auto& add = nets[i];
    const double combined = fold.net.radius + add.radius;
    const auto pairs = static_cast<unsigned __int128>(fold.net.centers.size()) *
                       add.centers.size();
    source_product *= static_cast<double>(add.centers.size());

    std::vector<Vector<Scalar>> sums;
    if (pairs <= budget) {
      // Full product, accumulated-net-major order.
      sums.reserve(static_cast<std::size_t>(pairs));
      for (const auto& a : fold.net.centers) {
        for (const auto& c : add.centers) {
          sums.push_back(a + c);
        }
      }
      fold.net.centers = std::move(sums);
      fold.net.radius = combined;
    } else {
      // Over budget: re-net the streamed product at the combined radius.
      // The admitted centers then cover the product points within
      // `combined`, so the sound radius doubles.
      for (const auto& a : fold.net.centers) {
        for (const auto& c : add.centers) {
          Vector<Scalar> s = a + c;
          bool admitted = true;
          for (const auto& existing : sums) {
            if ((s - existing).norm() <= combined) {
              admitted = false;
              break;
            }
          }
          if (admitted) {
            sums.push_back(std::move(s));
          }
        }
      }
      fold.net.centers = std::move(sums);
      fold.net.radius = 2.0 * combined;
      fold.renetted = true;
    }
  }
  fold.net.source_count =
      source_product < static_cast<double>(std::numeric_limits<std::size_t>::max())
          ? static_cast<std::size_t>(source_product)
          : std::numeric_limits<std::size_t>::max();
  return fold;
}

}  // namespace detail

/// Net of the Minkowski sum: one center per combination of input
/// centers, radius = sum of input radii. If the product count exceeds
/// `budget` the product is re-netted greedily at the combined radius and
/// the returned radius accounts for that extra hop (doubles).
template <typename Scalar>
EpsNet<Scalar> minkowski_sum_net(const std::vector<EpsNet<Scalar>>& nets,
                                 std::size_t budget) {
  return detail::minkowski_fold(nets, budget).net;
}

namespace detail {

inline std::vector<double> time_grid(double T, int n_times) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw InvalidInputError("time grid: T must be positive and finite");
  }
  if (n_times < 2) {
    throw InvalidInputError("time grid: n_times must be >= 2");
  }
  std::vector<double> grid(static_cast<std::size_t>(n_times));
  for (int i = 0; i < n_times; ++i) {
    grid[static_cast<std::size_t>(i)] =
        T * static_cast<double>(i) / static_cast<double>(n_times - 1);
  }
  grid.front() = 0.0;
  grid.back() = T;
  return grid;
}

/// levels[j][sample] with samples flattened time-major: sample index
/// i_time * n_controls + i_control. One hierarchy integration per
/// control produces every layer and every time at once.
template <typename Scalar>
std::vector<std::vector<Vector<Scalar>>> sample_levels(
    const Matrix<Scalar>& A, const Matrix<Scalar>& B, const Vector<Scalar>& psi0,
    int j_max, const std::vector<double>& times,
    const std::vector<PiecewiseConstantControl>& controls,
    const dyson::DysonConfig& cfg) {
  const std::size_t n_controls = controls.size();
  const std::size_t n_times = times.size();
  std::vector<std::vector<Vector<Scalar>>> levels(
      static_cast<std::size_t>(j_max) + 1,
      std::vector<Vector<Scalar>>(n_times * n_controls));
  for (std::size_t k = 0; k < n_controls; ++k) {
    auto recs = dyson::detail::integrate_hierarchy(A, B, psi0, controls[k], j_max,
                                                   times, cfg.grid_points_per_piece);
    for (std::size_t i = 0; i < n_times; ++i) {
      for (int level = 0; level <= j_max; ++level) {
        levels[static_cast<std::size_t>(level)][i * n_controls + k] =
            std::move(recs[i][static_cast<std::size_t>(level)]);
      }
    }
  }
  return levels;
}

}  // namespace detail

/// Sampled Dyson-layer set {W_j(t_i, u_k) psi0} over a uniform time grid
/// and the given control family, ordered time-major then control-major.
template <typename Scalar>
std::vector<Vector<Scalar>> sample_w_set(const Matrix<Scalar>& A,
                                         const Matrix<Scalar>& B,
                                         const Vector<Scalar>& psi0, int j, double T,
                                         double K, int n_times,
                                         const std::vector<PiecewiseConstantControl>& controls,
                                         const dyson::DysonConfig& cfg) {
  dyson::detail::validate_system(A, B, psi0);
  dyson::validate(cfg);
  if (j < 0) {
    throw InvalidInputError("sample_w_set: j must be >= 0");
  }
  if (controls.empty()) {
    throw InvalidInputError("sample_w_set: need at least one control");
  }
  for (const auto& u : controls) {
    if (u.l1_norm() > K + 1e-9) {
      throw InvalidInputError("sample_w_set: control family member exceeds the L1 budget K");
    }
  }
  auto levels = detail::sample_levels(A, B, psi0, j, detail::time_grid(T, n_times),
                                      controls, cfg);
  return std::move(levels[static_cast<std::size_t>(j)]);
}

template <typename Scalar>
struct AttainableNetResult {
  EpsNet<Scalar> net;
  /// N_eps: layers 0..N_eps were netted, the tail from N_eps is certified.
  int truncation_order = 0;
  std::size_t sample_count = 0;
  /// Largest distance from a sampled attainable point to the net centers
  /// (via the constructive witness when the Minkowski product was exact).
  double max_in_sample_distance = 0.0;
  bool in_sample_coverage = false;
  bool renetted = false;
};

/// Net of the sampled attainable set at |u|_L1 <= K, t <= T:
///  1. pick N_eps so the layer tail stays below eps/2 uniformly on the cell,
///  2. greedy-net each sampled layer set at eps / (2 (N_eps + 1)),
///  3. Minkowski-sum the layer nets,
///  4. certify every sampled attainable partial sum against the result.
/// The returned radius is the Minkowski radius plus the eps/2 tail
/// allowance (= eps when the product stayed within budget).
template <typename Scalar>
AttainableNetResult<Scalar> build_attainable_net(
    const Matrix<Scalar>& A, const Matrix<Scalar>& B, const Vector<Scalar>& psi0,
    double T, double K, double eps, int family_size, std::uint64_t seed,
    const dyson::DysonConfig& cfg, int n_times = 32, int n_pieces = 1,
    std::size_t budget = 1000000) {
  dyson::detail::validate_system(A, B, psi0);
  dyson::validate(cfg);
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw InvalidInputError("attainable_net: eps must be positive and finite");
  }
  if (family_size < 1) {
    throw InvalidInputError("attainable_net: family_size must be >= 1");
  }

  const linops::SemigroupBounds bounds = linops::semigroup_bounds(A);
  const double B_norm = linops::operator_norm(B);
  const double psi0_norm = psi0.norm();
  // The tail certificate must hold for every t in [0, T]; the prefactor
  // e^{omega t} peaks at T for omega >= 0 and at 0 otherwise.
  const double t_sup = bounds.omega >= 0.0 ? T : 0.0;
  const int order = dyson::choose_truncation(eps, t_sup, K, psi0_norm, bounds, B_norm,
                                             cfg.max_order);

  const auto family = controls::control_family(T, K, n_pieces, family_size, seed);
  const auto times = detail::time_grid(T, n_times);
  auto levels = detail::sample_levels(A, B, psi0, order, times, family, cfg);
  const std::size_t n_samples = levels.front().size();

  const double delta = eps / (2.0 * static_cast<double>(order + 1));
  std::vector<EpsNet<Scalar>> layer_nets;
  std::vector<std::vector<std::size_t>> assignments;
  layer_nets.reserve(levels.size());
  assignments.reserve(levels.size());
  for (const auto& layer : levels) {
    auto greedy = detail::greedy_eps_net_with_assignment(layer, delta);
    layer_nets.push_back(std::move(greedy.net));
    assignments.push_back(std::move(greedy.assignment));
  }

  auto fold = detail::minkowski_fold(layer_nets, budget);

  AttainableNetResult<Scalar> result;
  result.truncation_order = order;
  result.sample_count = n_samples;
  result.renetted = fold.renetted;
  result.net.radius = fold.net.radius + eps / 2.0;
  result.net.source_count = n_samples;

  // Certify the sampled attainable partial sums. Without re-netting the
  // covering center of sample i is the sum of its layer centers, a
  // product member by construction; otherwise fall back to a search.
  const Eigen::Index dim = psi0.size();
  double max_dist = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    Vector<Scalar> point = Vector<Scalar>::Zero(dim);
    for (const auto& layer : levels) {
      point += layer[i];
    }
    double dist;
    if (!fold.renetted) {
      Vector<Scalar> witness = Vector<Scalar>::Zero(dim);
      for (std::size_t level = 0; level < layer_nets.size(); ++level) {
        witness += layer_nets[level].centers[assignments[level][i]];
      }
      dist = (point - witness).norm();
    } else {
      dist = std::numeric_limits<double>::infinity();
      for (const auto& c : fold.net.centers) {
        dist = std::min(dist, (point - c).norm());
      }
    }
    max_dist = std::max(max_dist, dist);
  }
  result.max_in_sample_distance = max_dist;
  result.in_sample_coverage = max_dist <= fold.net.radius + 1e-12;
  result.net.centers = std::move(fold.net.centers);
  return result;
}

/// See build_attainable_net; this returns just the certified net.
template <typename Scalar>
EpsNet<Scalar> attainable_net(const Matrix<Scalar>& A, const Matrix<Scalar>& B,
                              const Vector<Scalar>& psi0, double T, double K,
                              double eps, int family_size, std::uint64_t seed,
                              const dyson::DysonConfig& cfg, int n_times = 32,
                              int n_pieces = 1, std::size_t budget = 1000000) {
  return build_attainable_net(A, B, psi0, T, K, eps, family_size, seed, cfg, n_times,
                              n_pieces, budget)
      .net;
}

/// For each target, its distance to the net as a set: the gap left after
/// subtracting the ball radius from the nearest-center distance, floored
/// at zero.
template <typename Scalar>
std::vector<double> obstruction_report(const EpsNet<Scalar>& net,
                                       const std::vector<Vector<Scalar>>& targets) {
  if (net.centers.empty()) {
    throw InvalidInputError("obstruction_report: net has no centers");
  }
  const Eigen::Index dim = net.centers.front().size();
  for (const auto& t : targets) {
    if (t.size() != dim) {
      throw InvalidInputError("obstruction_report: target dimension mismatch");
    }
  }
  // Pack centers once; per-target distances via one matrix-vector sweep.
  Matrix<Scalar> centers(dim, static_cast<Eigen::Index>(net.centers.size()));
  for (std::size_t c = 0; c < net.centers.size(); ++c) {
    centers.col(static_cast<Eigen::Index>(c)) = net.centers[c];
  }
  const Eigen::VectorXd center_sq = centers.colwise().squaredNorm().real().transpose();

  std::vector<double> distances;
  distances.reserve(targets.size());
  for (const auto& t : targets) {
    const Eigen::VectorXd cross = (centers.adjoint() * t).real();
    const double t_sq = t.squaredNorm();
    double best_sq = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.cols(); ++c) {
      best_sq = std::min(best_sq, center_sq(c) + t_sq - 2.0 * cross(c));
    }
    const double d = std::sqrt(std::max(best_sq, 0.0));
    distances.push_back(std::max(0.0, d - net.radius));
  }
  return distances;
}

/// Deterministic seeded targets, uniform on the unit sphere.
template <typename Scalar>
std::vector<Vector<Scalar>> unit_sphere_targets(Eigen::Index dim, int count,
                                                std::uint64_t seed) {
  if (dim < 1 || count < 0) {
    throw InvalidInputError("unit_sphere_targets: need dim >= 1 and count >= 0");
  }
  std::mt19937_64 gen(seed);
  std::vector<Vector<Scalar>> targets;
  targets.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Vector<Scalar> v(dim);
    for (Eigen::Index d = 0; d < dim; ++d) {
      if constexpr (is_complex_v<Scalar>) {
        v(d) = Complex(rng::gaussian(gen), rng::gaussian(gen));
      } else {
        v(d) = rng::gaussian(gen);
      }
    }
    const double norm = v.norm();
    if (norm > 0.0) {
      v /= Scalar(norm);
    } else {
      v.setZero();
      v(0) = Scalar(1.0);
    }
    targets.push_back(std::move(v));
  }
  return targets;
}

}  // namespace bcs::reach
