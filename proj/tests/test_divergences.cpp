#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pairs.hpp"
#include "smoothot/divergences.hpp"
#include "smoothot/errors.hpp"
#include "smoothot/limits.hpp"
#include "smoothot/quadrature.hpp"
#include "smoothot/smoothing.hpp"

using namespace smoothot;
using namespace testpairs;

namespace {

double normal_cdf_ref(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// W_1 = int |F_mu - F_nu| dx for the smoothed 1-D measures.
double w1_by_cdf(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t) {
  const SmoothedMeasure a(mu, t);
  const SmoothedMeasure b(nu, t);
  const double r = 4.0 + 14.0 * std::sqrt(t);
  AdaptiveOptions opts;
  opts.rel_tol = 1e-12;
  return integrate_adaptive(
             [&](double x) {
               // Work on the smaller tail to keep precision on both sides.
               return x < 0.0 ? std::abs(cdf_1d(a, x) - cdf_1d(b, x))
                              : std::abs(sf_1d(a, x) - sf_1d(b, x));
             },
             -r, r, opts)
      .value;
}

}  // namespace

TEST_CASE("method and divergence names") {
  for (Method m : {Method::Exact1d, Method::Sinkhorn, Method::Quadrature, Method::MonteCarlo,
                   Method::ChaosBound, Method::DualBound}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  for (FDivergence k : {FDivergence::Chi2, FDivergence::Kl, FDivergence::Tv}) {
    CHECK(fdivergence_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(method_from_string("simplex"), InvalidInput);
}

TEST_CASE("quantile W_p examples") {
  const auto same = wp_1d(skewed_left(), skewed_left(), 3.0, 2.0);
  CHECK(same.value == 0.0);
  for (double t : {0.1, 1.0, 100.0, 1e4}) {
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      CHECK(wp_1d(origin(), unit_dirac(), t, p).value == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const auto a = wp_1d(symmetric_two_point(), origin(), 1e4, 2.0);
  const double w2sq = a.diagnostics.at("power_value");
  CHECK(w2sq == doctest::Approx(2.5e-5).epsilon(0.03));
  const double surrogate = std::pow(std::sqrt(10001.0) - 100.0, 2);
  CHECK(w2sq == doctest::Approx(surrogate).epsilon(0.001));
  CHECK(a.method == Method::Exact1d);
  REQUIRE(a.error_estimate.has_value());
  CHECK(*a.error_estimate <= 1e-6 * a.value);

  CHECK_THROWS_AS(wp_1d(planar_two_point(), origin(2), 1.0, 2.0), InvalidInput);
  CHECK_THROWS_AS(wp_1d(origin(), unit_dirac(), 1.0, 0.5), InvalidInput);
  CHECK_THROWS_AS(wp_1d(origin(), unit_dirac(), 1.0, 2.0, 50), InvalidInput);
  CHECK_THROWS_AS(wp_1d(origin(), unit_dirac(), 0.0, 2.0), InvalidInput);
}

TEST_CASE("W_1 matches the CDF integral") {
  const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs = {
      {symmetric_two_point(), origin()}, {skewed_left(), skewed_right()}};
  for (const auto& [mu, nu] : pairs) {
    for (double t : {0.5, 10.0, 1000.0}) {
      const double oracle = w1_by_cdf(mu, nu, t);
      const auto r = wp_1d(mu, nu, t, 1.0);
      // Steep quantiles at small t can leave a resolved error above 1e-6; the
      // estimate must then account for it.
      CHECK(std::abs(r.value - oracle) <= 1e-6 * oracle + *r.error_estimate);
      CHECK(wp_1d(mu, nu, t, 1.0, 1600).value == doctest::Approx(oracle).epsilon(1e-6));
    }
  }
}

TEST_CASE("W_p ordering, symmetry and translation invariance") {
  for (double t : {1.0, 30.0, 1000.0}) {
    double prev = 0.0;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const double w = wp_1d(skewed_left(), skewed_right(), t, p).value;
      CHECK(w >= prev * (1.0 - 1e-10));
      prev = w;
      CHECK(wp_1d(skewed_right(), skewed_left(), t, p).value == doctest::Approx(w).epsilon(1e-10));
      const Point v{4.25};
      const double moved =
          wp_1d(translate(skewed_left(), v), translate(skewed_right(), v), t, p).value;
      CHECK(moved == doctest::Approx(w).epsilon(1e-9));
    }
  }
}

TEST_CASE("Sinkhorn divergence") {
  const auto same = sinkhorn_w2(symmetric_two_point(), symmetric_two_point(), 100.0, 128, 25.0);
  CHECK(same.value * same.value <= 1e-8);

  const auto one = sinkhorn_w2(symmetric_two_point(), origin(), 100.0, 256, 25.0);
  const double exact = wp_1d(symmetric_two_point(), origin(), 100.0, 2.0).value;
  CHECK(one.value == doctest::Approx(exact).epsilon(0.05));
  CHECK(one.diagnostics.at("marginal_violation") <= 1e-9);
  CHECK(one.diagnostics.at("tail_mass") <= 1e-8);
  CHECK(one.diagnostics.at("iterations") > 0.0);
  CHECK(one.method == Method::Sinkhorn);

  const auto shift = sinkhorn_w2(origin(), unit_dirac(), 4.0, 256, 1.0);
  CHECK(shift.value == doctest::Approx(1.0).epsilon(0.02));

  SinkhornOptions tight;
  tight.max_iterations = 3;
  try {
    sinkhorn_w2(skewed_left(), skewed_right(), 1.0, 128, 0.01, tight);
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_violation() > 1e-9);
  }
  CHECK_THROWS_AS(sinkhorn_w2(origin(), unit_dirac(), 1.0, 64, 0.0), InvalidInput);
  CHECK_THROWS_AS(sinkhorn_w2(origin(3), origin(3), 1.0, 16, 1.0), InvalidInput);
}

TEST_CASE("Sinkhorn divergence in the plane") {
  const double t = 1000.0;
  const auto r = sinkhorn_w2(planar_two_point(), origin(2), t, 64, 0.25 * t);
  CHECK(t * r.value * r.value == doctest::Approx(0.25).epsilon(0.15));
  const auto shift = sinkhorn_w2(origin(2), DiscreteMeasure::dirac({0.0, 1.0}), 4.0, 64, 1.0);
  CHECK(shift.value == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("f-divergence examples") {
  for (FDivergence k : {FDivergence::Chi2, FDivergence::Kl, FDivergence::Tv}) {
    CHECK(f_divergence(skewed_left(), skewed_left(), 5.0, k, Method::Quadrature, 20000, 0).value ==
          0.0);
  }
  const double t = 1e4;
  const auto chi2 = f_divergence(symmetric_two_point(), origin(), t, FDivergence::Chi2,
                                 Method::Quadrature, 20000, 0);
  CHECK(t * t * chi2.value == doctest::Approx(0.5).epsilon(0.05));
  const auto tv = f_divergence(symmetric_two_point(), origin(), t, FDivergence::Tv,
                               Method::Quadrature, 20000, 0);
  CHECK(t * tv.value == doctest::Approx(0.241971).epsilon(0.02));
  CHECK(tv.diagnostics.at("converged") == 1.0);
  CHECK(tv.method == Method::Quadrature);
  CHECK_THROWS_AS(f_divergence(origin(3), origin(3), 1.0, FDivergence::Tv, Method::Quadrature,
                               1000, 0),
                  InvalidInput);
  CHECK_THROWS_AS(f_divergence(origin(), unit_dirac(), 1.0, FDivergence::Tv, Method::Sinkhorn,
                               1000, 0),
                  InvalidInput);
}

TEST_CASE("f-divergences between shifted Gaussians") {
  // N(0, t) against N(1, t).
  for (double t : {0.25, 1.0, 40.0}) {
    auto q = [&](FDivergence k) {
      return f_divergence(origin(), unit_dirac(), t, k, Method::Quadrature, 20000, 0).value;
    };
    CHECK(q(FDivergence::Chi2) == doctest::Approx(std::expm1(1.0 / t)).epsilon(1e-8));
    CHECK(q(FDivergence::Kl) == doctest::Approx(0.5 / t).epsilon(1e-8));
    CHECK(q(FDivergence::Tv) ==
          doctest::Approx(2.0 * normal_cdf_ref(0.5 / std::sqrt(t)) - 1.0).epsilon(1e-8));
  }
  // Same pair in the plane via the nested rule.
  const auto planar = f_divergence(origin(2), DiscreteMeasure::dirac({0.0, 1.0}), 1.0,
                                   FDivergence::Kl, Method::Quadrature, 20000, 0);
  CHECK(planar.value == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("Monte Carlo f-divergences agree with quadrature") {
  for (FDivergence k : {FDivergence::Chi2, FDivergence::Kl, FDivergence::Tv}) {
    const double t = 2.0;
    const auto quad = f_divergence(skewed_left(), skewed_right(), t, k, Method::Quadrature, 20000, 0);
    const auto mc = f_divergence(skewed_left(), skewed_right(), t, k, Method::MonteCarlo, 400000, 7);
    REQUIRE(mc.error_estimate.has_value());
    CHECK(std::abs(mc.value - quad.value) <= 4.0 * *mc.error_estimate);
    CHECK(mc.method == Method::MonteCarlo);
    const auto again = f_divergence(skewed_left(), skewed_right(), t, k, Method::MonteCarlo, 400000, 7);
    CHECK(again.value == mc.value);
  }
  // Any dimension.
  const auto [mu, nu] = gen_matched_pair(1, 3, 2);
  const auto tv = f_divergence(mu, nu, 1.0, FDivergence::Tv, Method::MonteCarlo, 100000, 1);
  CHECK(tv.value > 0.0);
  CHECK(tv.value <= 1.0);
}

TEST_CASE("Pinsker and chi-square bounds at every computed point") {
  const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs = {
      {symmetric_two_point(), origin()},
      {skewed_left(), skewed_right()},
      {origin(), unit_dirac()},
      {planar_two_point(), origin(2)}};
  for (const auto& [mu, nu] : pairs) {
    for (double t : {0.3, 3.0, 100.0, 1e4}) {
      auto q = [&](FDivergence k) {
        return f_divergence(mu, nu, t, k, Method::Quadrature, 20000, 0).value;
      };
      const double chi2 = q(FDivergence::Chi2);
      const double kl = q(FDivergence::Kl);
      const double tv = q(FDivergence::Tv);
      CHECK(tv >= 0.0);
      CHECK(tv <= 1.0);
      CHECK(tv * tv <= kl / 2.0);
      CHECK(kl <= std::log1p(chi2));
      CHECK(f_divergence(nu, mu, t, FDivergence::Tv, Method::Quadrature, 20000, 0).value ==
            doctest::Approx(tv).epsilon(1e-8));
    }
  }
}

TEST_CASE("chaos upper bound on W_2^2") {
  const auto r = moser_w2_upper_bound(symmetric_two_point(), origin(), 100.0, 6);
  CHECK(r.value == doctest::Approx(std::exp(1.0 / 200.0) * 0.00250001).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.0025125).epsilon(1e-4));
  CHECK(r.diagnostics.at("tail_bound") >= 0.0);
  CHECK(r.method == Method::ChaosBound);
  CHECK(moser_w2_upper_bound(skewed_left(), skewed_left(), 10.0, 6).value == 0.0);
  CHECK_THROWS_AS(moser_w2_upper_bound(origin(), unit_dirac(), 10.0, 6), InvalidInput);

  const double t = 1e4;
  const double bound = moser_w2_upper_bound(symmetric_two_point(), origin(), t, 6).value;
  const double exact = wp_1d(symmetric_two_point(), origin(), t, 2.0).diagnostics.at("power_value");
  CHECK(bound / exact >= 1.0);
  CHECK(bound / exact <= 1.01);
}

TEST_CASE("smooth bump profile") {
  std::vector<double> grad_norms;
  for (double r = 0.0; r <= 2.5; r += 0.001) {
    const Point x{r};
    const double v = smooth_bump(x);
    if (r <= 1.0) CHECK(v == 1.0);
    if (r >= 2.0) CHECK(v == 0.0);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    const auto g = smooth_bump_gradient(x);
    CHECK(std::abs(g[0]) <= 2.0 + 1e-12);
    if (r > 1.0005 && r < 1.9995) {
      const double fd = (smooth_bump(Point{r + 1e-6}) - smooth_bump(Point{r - 1e-6})) / 2e-6;
      CHECK(g[0] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
  CHECK(std::abs(smooth_bump_gradient(Point{1.5})[0]) == doctest::Approx(2.0).epsilon(1e-12));
  // Radial in the plane.
  CHECK(smooth_bump(Point{0.9, 0.9}) == doctest::Approx(smooth_bump(Point{std::sqrt(1.62)})));
}

TEST_CASE("dual lower bound on W_1") {
  CHECK(w1_dual_lower_bound(skewed_left(), skewed_left(), 10.0).value == 0.0);
  double lowest = 1e300;
  double highest = 0.0;
  for (double t : {1e2, 1e3, 1e4}) {
    const auto r = w1_dual_lower_bound(symmetric_two_point(), origin(), t);
    const double w1 = wp_1d(symmetric_two_point(), origin(), t, 1.0).value;
    CHECK(r.value > 0.0);
    CHECK(r.value <= w1);
    CHECK(r.method == Method::DualBound);
    lowest = std::min(lowest, std::sqrt(t) * r.value);
    highest = std::max(highest, std::sqrt(t) * r.value);
  }
  CHECK(lowest >= 0.5 * highest);

  const auto planar = w1_dual_lower_bound(planar_two_point(), origin(2), 100.0, 101);
  CHECK(planar.value > 0.0);
  CHECK(planar.value <= wp_1d(symmetric_two_point(), origin(), 100.0, 1.0).value * 1.0001);
  CHECK_THROWS_AS(w1_dual_lower_bound(origin(), unit_dirac(), 10.0), InvalidInput);
}

TEST_CASE("lower bound, W_1, W_2 and the chaos bound are ordered") {
  const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs = {
      {symmetric_two_point(), origin()}, {skewed_left(), skewed_right()}};
  for (const auto& [mu, nu] : pairs) {
    for (double t : {10.0, 100.0, 1000.0}) {
      const double dual = w1_dual_lower_bound(mu, nu, t).value;
      const double w1 = wp_1d(mu, nu, t, 1.0).value;
      const double w2 = wp_1d(mu, nu, t, 2.0).value;
      const double upper = std::sqrt(moser_w2_upper_bound(mu, nu, t, 8).value);
      CHECK(dual <= w1);
      CHECK(w1 <= w2 * (1.0 + 1e-10));
      CHECK(w2 <= upper);
    }
  }
}

TEST_CASE("results serialise to JSON") {
  const auto r = wp_1d(symmetric_two_point(), origin(), 10.0, 2.0);
  const auto j = result_to_json(r);
  CHECK(j["method"] == "exact1d");
  CHECK(j["value"].get<double>() == r.value);
  CHECK(j["diagnostics"]["p"] == 2.0);
}
