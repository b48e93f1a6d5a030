#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bcs/controls.hpp"
#include "bcs/errors.hpp"
#include "bcs/rng.hpp"

using namespace bcs;
using controls::PiecewiseConstantControl;
using controls::control_family;

namespace {

std::string serialize(const std::vector<PiecewiseConstantControl>& family) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& u : family) {
    for (double b : u.breakpoints()) out << b << ';';
    out << '|';
    for (double v : u.values()) out << v << ';';
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("eval picks the half-open interval and vanishes past support") {
  PiecewiseConstantControl u({0.0, 1.0}, {5.0});
  CHECK(u.eval(0.5) == 5.0);
  CHECK(u.eval(0.0) == 5.0);
  CHECK(u.eval(2.0) == 0.0);
  CHECK(u.eval(1.0) == 0.0);  // support is [0, 1)

  PiecewiseConstantControl v({0.0, 1.0, 2.0}, {3.0, -4.0});
  CHECK(v.eval(1.0) == -4.0);  // half-open convention at the breakpoint
  CHECK_THROWS_AS(v.eval(-0.1), InvalidInputError);
}

TEST_CASE("l1_norm closed forms") {
  CHECK(PiecewiseConstantControl({0.0, 1.0}, {5.0}).l1_norm() == 5.0);
  CHECK(PiecewiseConstantControl({0.0, 1.0, 2.0}, {3.0, -4.0}).l1_norm() == 7.0);
  CHECK(PiecewiseConstantControl({0.0}, {}).l1_norm() == 0.0);
  CHECK(PiecewiseConstantControl{}.l1_norm() == 0.0);
}

TEST_CASE("truncated norms and integrals match piecewise sums") {
  PiecewiseConstantControl u({0.0, 0.5, 1.25, 2.0}, {2.0, -1.0, 0.5});
  CHECK(u.l1_norm() == doctest::Approx(2.0 * 0.5 + 1.0 * 0.75 + 0.5 * 0.75).epsilon(1e-15));
  CHECK(u.integral_up_to(2.0) == doctest::Approx(1.0 - 0.75 + 0.375).epsilon(1e-15));
  CHECK(u.integral_up_to(0.75) == doctest::Approx(1.0 - 0.25).epsilon(1e-15));
  CHECK(u.l1_norm_up_to(0.75) == doctest::Approx(1.0 + 0.25).epsilon(1e-15));
  CHECK(u.l1_norm_up_to(10.0) == u.l1_norm());
}

TEST_CASE("constructor rejects malformed controls") {
  CHECK_THROWS_AS(PiecewiseConstantControl({1.0, 2.0}, {1.0}), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseConstantControl({0.0, 1.0, 1.0}, {1.0, 2.0}), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseConstantControl({0.0, 1.0}, {1.0, 2.0}), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseConstantControl({0.0, 1.0}, {std::nan("")}), InvalidInputError);
  CHECK_THROWS_AS(PiecewiseConstantControl({}, {}), InvalidInputError);
}

TEST_CASE("control_family with K = 0 yields only zero controls") {
  auto family = control_family(1.0, 0.0, 3, 3, 7);
  REQUIRE(family.size() == 3);
  for (const auto& u : family) {
    CHECK(u.l1_norm() == 0.0);
  }
}

TEST_CASE("control_family includes the zero control and a boundary member") {
  auto family = control_family(1.0, 2.0, 1, 2, 1);
  REQUIRE(family.size() == 2);
  CHECK(family[0].l1_norm() == 0.0);
  // Constant control of value +-2 on [0, 1]: norm is exactly K.
  CHECK(family[1].l1_norm() == 2.0);
  CHECK(std::abs(family[1].values()[0]) == 2.0);
}

TEST_CASE("control_family respects the norm budget") {
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    auto family = control_family(2.5, 1.7, 4, 50, seed);
    for (const auto& u : family) {
      CHECK(u.l1_norm() <= 1.7 + 1e-12);
      CHECK(u.support_end() == doctest::Approx(2.5));
    }
  }
}

TEST_CASE("control_family is deterministic for fixed inputs") {
  auto a = control_family(1.5, 2.0, 3, 20, 42);
  auto b = control_family(1.5, 2.0, 3, 20, 42);
  CHECK(serialize(a) == serialize(b));
  auto c = control_family(1.5, 2.0, 3, 20, 43);
  CHECK(serialize(a) != serialize(c));
}

TEST_CASE("control_family rejects invalid parameters") {
  CHECK_THROWS_AS(control_family(0.0, 1.0, 1, 1, 0), InvalidInputError);
  CHECK_THROWS_AS(control_family(1.0, -1.0, 1, 1, 0), InvalidInputError);
  CHECK_THROWS_AS(control_family(1.0, 1.0, 0, 1, 0), InvalidInputError);
  CHECK_THROWS_AS(control_family(1.0, 1.0, 1, 0, 0), InvalidInputError);
}
