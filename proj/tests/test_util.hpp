#pragma once

#include <random>
#include <vector>

#include "bcs/controls.hpp"
#include "bcs/linops.hpp"
#include "bcs/rng.hpp"

namespace bcs::testutil {

inline Matrix<double> rotation_generator() {
  Matrix<double> a(2, 2);
  a << 0.0, -1.0, 1.0, 0.0;
  return a;
}

inline Matrix<double> random_matrix(std::mt19937_64& gen, int dim, double scale) {
  Matrix<double> a(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      a(r, c) = rng::uniform(gen, -scale, scale);
    }
  }
  return a;
}

inline Vector<double> random_vector(std::mt19937_64& gen, int dim, double scale) {
  Vector<double> v(dim);
  for (int i = 0; i < dim; ++i) {
    v(i) = rng::uniform(gen, -scale, scale);
  }
  return v;
}

/// Random control on [0, T] with n_pieces uniform pieces and L1 norm
/// exactly `l1` (up to rounding in the rescale).
inline controls::PiecewiseConstantControl random_control(std::mt19937_64& gen, double T,
                                                         int n_pieces, double l1) {
  std::vector<double> breaks(static_cast<std::size_t>(n_pieces) + 1);
  for (int i = 0; i <= n_pieces; ++i) {
    breaks[static_cast<std::size_t>(i)] = T * i / n_pieces;
  }
  breaks[0] = 0.0;
  std::vector<double> values(static_cast<std::size_t>(n_pieces));
  double raw = 0.0;
  for (auto& v : values) {
    v = rng::uniform(gen, -1.0, 1.0);
    raw += std::abs(v) * (T / n_pieces);
  }
  if (raw > 0.0) {
    for (auto& v : values) {
      v *= l1 / raw;
    }
  }
  return controls::PiecewiseConstantControl(breaks, values);
}

inline controls::PiecewiseConstantControl constant_control(double value, double T) {
  return controls::PiecewiseConstantControl({0.0, T}, {value});
}

}  // namespace bcs::testutil
