#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pairs.hpp"
#include "smoothot/errors.hpp"
#include "smoothot/limits.hpp"

using namespace smoothot;
using namespace testpairs;

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

TEST_CASE("constants for the symmetric two-point pair") {
  const auto c = limit_constants(symmetric_two_point(), origin());
  CHECK(c.n == 1);
  CHECK(c.c_w2 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.c_chi2 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.c_kl == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.rate_w2 == 1.0);
  CHECK(c.rate_chi2 == 2.0);
  CHECK(c.rate_kl == 2.0);
  CHECK(c.rate_tv == 1.0);
  // E|Z^2 - 1| = 4 phi(1), so the constant is phi(1).
  REQUIRE(c.c_tv_quadrature.has_value());
  CHECK(*c.c_tv_quadrature == doctest::Approx(phi(1.0)).epsilon(1e-12));
  CHECK(c.c_tv == doctest::Approx(phi(1.0)).epsilon(0.005));
  CHECK(c.c_tv_stderr <= c.c_tv / 100.0);
  CHECK(std::abs(c.c_tv - *c.c_tv_quadrature) <= 3.0 * c.c_tv_stderr);
}

TEST_CASE("constants for the translation pair") {
  const auto c = limit_constants(origin(), unit_dirac());
  CHECK(c.n == 0);
  CHECK(c.c_w2 == 1.0);
  CHECK(c.c_chi2 == 1.0);
  CHECK(c.rate_w2 == 0.0);
  // (1/2) E|Z| = 1 / sqrt(2 pi).
  CHECK(*c.c_tv_quadrature == doctest::Approx(phi(0.0)).epsilon(1e-12));
}

TEST_CASE("constants for the skewed pair") {
  const auto c = limit_constants(skewed_left(), skewed_right());
  CHECK(c.n == 2);
  CHECK(c.c_w2 == doctest::Approx(8.0 / 9.0).epsilon(1e-13));
  CHECK(c.c_chi2 == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
  CHECK(c.c_kl == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  // Coefficient 4 / 3! on He_3; E|He_3(Z)| = 2 (phi(0) + 4 phi(sqrt 3)) by integrating
  // between the roots 0, +-sqrt 3 with the antiderivatives -phi and -(z^2 + 2) phi.
  const double expected = (2.0 / 3.0) * (phi(0.0) + 4.0 * phi(std::sqrt(3.0)));
  CHECK(*c.c_tv_quadrature == doctest::Approx(expected).epsilon(1e-11));
  CHECK(std::abs(c.c_tv - expected) <= 3.0 * c.c_tv_stderr);
}

TEST_CASE("structural identities between constants") {
  for (std::size_t d : {1u, 2u, 3u}) {
    for (int n : {0, 1, 2}) {
      const auto [mu, nu] = gen_matched_pair(n, d, 9);
      LimitOptions opts;
      opts.mc_samples = 200000;
      const auto c = limit_constants(mu, nu, opts);
      CHECK(c.n == n);
      CHECK(c.c_kl == c.c_chi2 / 2.0);
      if (n > 0) CHECK(c.c_w2 == c.c_chi2 / (n + 1));
      CHECK(c.c_w2 > 0.0);
      CHECK(c.c_chi2 > 0.0);
      CHECK(c.c_tv > 0.0);
      CHECK(c.rate_chi2 == n + 1);
      CHECK(c.rate_tv == 0.5 * (n + 1));

      const auto swapped = limit_constants(nu, mu, opts);
      CHECK(swapped.c_w2 == doctest::Approx(c.c_w2).epsilon(1e-12));
      CHECK(swapped.c_chi2 == doctest::Approx(c.c_chi2).epsilon(1e-12));
      CHECK(swapped.c_tv == doctest::Approx(c.c_tv).epsilon(1e-12));

      if (d == 1) {
        CHECK(std::abs(c.c_tv - *c.c_tv_quadrature) <= 3.0 * c.c_tv_stderr);
      } else {
        CHECK(!c.c_tv_quadrature.has_value());
      }
    }
  }
}

TEST_CASE("constants are translation invariant once the means agree") {
  for (int n : {1, 2}) {
    const auto [mu, nu] = gen_matched_pair(n, 2, 4);
    const auto c = limit_constants(mu, nu);
    const Point v{0.7, -1.9};
    const auto moved = limit_constants(translate(mu, v), translate(nu, v));
    CHECK(moved.n == c.n);
    CHECK(moved.c_w2 == doctest::Approx(c.c_w2).epsilon(1e-9));
    CHECK(moved.c_chi2 == doctest::Approx(c.c_chi2).epsilon(1e-9));
    CHECK(moved.c_tv == doctest::Approx(c.c_tv).epsilon(1e-9));
  }
}

TEST_CASE("planar two-point pair has the one-dimensional constants") {
  const auto c = limit_constants(planar_two_point(), origin(2));
  CHECK(c.n == 1);
  CHECK(c.c_w2 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(c.c_tv == doctest::Approx(phi(1.0)).epsilon(0.005));
}

TEST_CASE("identical measures are rejected") {
  CHECK_THROWS_AS(limit_constants(skewed_left(), skewed_left()), IndistinguishableMeasures);
  CHECK_THROWS_AS(limit_constants(origin(1), origin(2)), InvalidInput);
}

TEST_CASE("Gaussian surrogate distance") {
  CHECK(gaussian_w2(symmetric_two_point(), origin(), 100.0) ==
        doctest::Approx(std::sqrt(101.0) - 10.0).epsilon(1e-12));
  CHECK(gaussian_w2(symmetric_two_point(), origin(), 100.0) == doctest::Approx(0.049876).epsilon(1e-5));
  for (double t : {0.0, 1.0, 1e4}) {
    CHECK(gaussian_w2(skewed_left(), skewed_right(), t) <= 1e-7);
    CHECK(gaussian_w2(origin(), unit_dirac(), t) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Commuting covariances: the Bures term is sum (sqrt a_i - sqrt b_i)^2.
  const DiscreteMeasure wide(2, {Atom{{-2.0, 0.0}, 0.5}, Atom{{2.0, 0.0}, 0.5}});
  const DiscreteMeasure tall(2, {Atom{{0.0, -1.0}, 0.5}, Atom{{0.0, 1.0}, 0.5}});
  for (double t : {0.5, 3.0}) {
    const double expect = std::sqrt(std::pow(std::sqrt(4.0 + t) - std::sqrt(t), 2) +
                                    std::pow(std::sqrt(t) - std::sqrt(1.0 + t), 2));
    CHECK(gaussian_w2(wide, tall, t) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(gaussian_w2(tall, wide, t) == doctest::Approx(expect).epsilon(1e-12));
  }
  const auto [mu, nu] = gen_matched_pair(0, 3, 1);
  CHECK(gaussian_w2(mu, nu, 2.0) == doctest::Approx(gaussian_w2(nu, mu, 2.0)).epsilon(1e-10));
  CHECK_THROWS_AS(gaussian_w2(origin(), unit_dirac(), -1.0), InvalidInput);
}

TEST_CASE("limits JSON mirrors the constants") {
  const auto c = limit_constants(symmetric_two_point(), origin());
  const auto j = limits_to_json(c);
  CHECK(j["n"] == 1);
  CHECK(j["c_w2"].get<double>() == c.c_w2);
  CHECK(j["c_tv_quadrature"].get<double>() == *c.c_tv_quadrature);
}
