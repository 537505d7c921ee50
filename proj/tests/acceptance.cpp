// Runs every acceptance criterion and prints one PASS/FAIL line each.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pairs.hpp"
#include "smoothot/divergences.hpp"
#include "smoothot/harness.hpp"
#include "smoothot/hermite.hpp"
#include "smoothot/limits.hpp"
#include "smoothot/smoothing.hpp"

using namespace smoothot;
using namespace testpairs;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool within(double observed, double expected, double rtol) {
  return std::abs(observed - expected) <= rtol * std::abs(expected);
}

double w2sq_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t) {
  return wp_1d(mu, nu, t, 2.0).diagnostics.at("power_value");
}

SweepReport run_sweep(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric metric,
                      Method method, double t_min = 1e2, double t_max = 1e4, int points = 7) {
  SweepConfig c;
  c.metric = metric;
  c.method = method;
  c.t_min = t_min;
  c.t_max = t_max;
  c.points = points;
  return sweep(mu, nu, c);
}

// Symmetric two-point pair on the line against the origin: n = 1.
Outcome w2_limit_symmetric() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_sweep(symmetric_two_point(), origin(), Metric::W2sq, Method::Exact1d);
  const double elapsed = seconds_since(start);
  const double last = r.rows.back().rescaled_value;
  std::ostringstream s;
  s << "t W2^2 at 1e4 = " << last << " (limit 0.25, rtol 0.05); sweep " << elapsed << " s (< 30)";
  return {within(last, 0.25, 0.05) && elapsed < 30.0, s.str()};
}

// Skewed pair with matching mean and variance: n = 2.
Outcome w2_limit_skewed() {
  const double t = 1e4;
  const double v = t * t * w2sq_exact(skewed_left(), skewed_right(), t);
  std::ostringstream s;
  s << "t^2 W2^2 at 1e4 = " << v << " (limit 8/9, rtol 0.10)";
  return {within(v, 8.0 / 9.0, 0.10), s.str()};
}

Outcome chi2_kl_limits() {
  const double t = 1e4;
  const auto chi2 = f_divergence(symmetric_two_point(), origin(), t, FDivergence::Chi2,
                                 Method::Quadrature, 20000, 0);
  const auto kl = f_divergence(symmetric_two_point(), origin(), t, FDivergence::Kl,
                               Method::Quadrature, 20000, 0);
  const double a = t * t * chi2.value;
  const double b = t * t * kl.value;
  std::ostringstream s;
  s << "t^2 chi2 = " << a << " (0.5), t^2 KL = " << b << " (0.25), rtol 0.05";
  return {within(a, 0.5, 0.05) && within(b, 0.25, 0.05), s.str()};
}

Outcome tv_limit() {
  const double t = 1e4;
  const double expected = phi(1.0);
  const double tv = t * f_divergence(symmetric_two_point(), origin(), t, FDivergence::Tv,
                                     Method::Quadrature, 20000, 0).value;
  LimitOptions opts;
  opts.mc_samples = 1'000'000;
  const auto c = limit_constants(symmetric_two_point(), origin(), opts);
  std::ostringstream s;
  s << "t TV at 1e4 = " << tv << " (phi(1) = " << expected << ", rtol 0.02); Monte Carlo c_tv = "
    << c.c_tv << " +/- " << c.c_tv_stderr << " (rtol 0.005)";
  return {within(tv, expected, 0.02) && within(c.c_tv, expected, 0.005), s.str()};
}

Outcome decay_rates() {
  struct Case {
    std::string name;
    DiscreteMeasure mu;
    DiscreteMeasure nu;
    int n;
  };
  std::vector<Case> cases = {{"symmetric", symmetric_two_point(), origin(), 1},
                             {"skewed", skewed_left(), skewed_right(), 2}};
  for (int n : {1, 2}) {
    for (std::uint64_t seed : {1u, 2u}) {
      auto [mu, nu] = gen_matched_pair(n, 1, seed);
      cases.push_back({"generated n=" + std::to_string(n) + " seed=" + std::to_string(seed),
                       std::move(mu), std::move(nu), n});
    }
  }
  bool pass = true;
  std::ostringstream s;
  for (const auto& c : cases) {
    const double w2 = run_sweep(c.mu, c.nu, Metric::W2sq, Method::Exact1d).fitted_exponent;
    const double w1sq = 2.0 * run_sweep(c.mu, c.nu, Metric::W1, Method::Exact1d).fitted_exponent;
    const bool ok = std::abs(w2 + c.n) <= 0.05 && std::abs(w1sq + c.n) <= 0.1;
    pass = pass && ok;
    s << c.name << ": W2^2 " << w2 << ", W1^2 " << w1sq << " (-" << c.n << "); ";
  }
  // Unequal means: no decay.
  const double flat = run_sweep(origin(), unit_dirac(), Metric::W2sq, Method::Exact1d).fitted_exponent;
  pass = pass && std::abs(flat) <= 0.05;
  s << "translation: W2^2 " << flat << " (0)";
  return {pass, s.str()};
}

Outcome moser_tightness() {
  bool pass = true;
  std::ostringstream s;
  for (double t : {1e3, 1e4}) {
    const double bound = moser_w2_upper_bound(symmetric_two_point(), origin(), t, 6).value;
    const double ratio = bound / w2sq_exact(symmetric_two_point(), origin(), t);
    pass = pass && ratio >= 1.0 && ratio <= 1.05;
    s << "t=" << t << ": ratio " << ratio << "; ";
  }
  s << "required in [1, 1.05]";
  return {pass, s.str()};
}

Outcome dual_lower_bound() {
  bool pass = true;
  double lo = INFINITY;
  double hi = 0.0;
  std::ostringstream s;
  for (double t : {1e2, 1e3, 1e4}) {
    const double bound = w1_dual_lower_bound(symmetric_two_point(), origin(), t).value;
    const double w1 = wp_1d(symmetric_two_point(), origin(), t, 1.0).value;
    pass = pass && bound > 0.0 && bound <= w1;
    lo = std::min(lo, std::sqrt(t) * bound);
    hi = std::max(hi, std::sqrt(t) * bound);
    s << "t=" << t << ": " << bound << " <= W1 " << w1 << "; ";
  }
  pass = pass && lo >= 0.5 * hi;
  s << "sqrt(t) bound in [" << lo << ", " << hi << "], min >= max / 2";
  return {pass, s.str()};
}

Outcome gaussian_surrogate() {
  auto gap = [](double t) {
    const double w2 = wp_1d(symmetric_two_point(), origin(), t, 2.0).value;
    return std::pair{w2, std::abs(w2 - gaussian_w2(symmetric_two_point(), origin(), t))};
  };
  const auto [w2_lo, gap_lo] = gap(1e2);
  const auto [w2_hi, gap_hi] = gap(1e4);
  std::ostringstream s;
  s << "t gap: " << 1e2 * gap_lo << " at 1e2, " << 1e4 * gap_hi << " at 1e4; gap / W2 at 1e4 = "
    << gap_hi / w2_hi << " (<= 1e-2)";
  return {1e4 * gap_hi <= 1e2 * gap_lo && gap_hi <= 1e-2 * w2_hi, s.str()};
}

Outcome zeroth_order() {
  const double w1 = wp_1d(translate(symmetric_two_point(), Point{3.0}), origin(), 1e4, 1.0).value;
  std::ostringstream s;
  s << "W1 at 1e4 = " << w1 << " (3, rtol 0.01)";
  return {within(w1, 3.0, 0.01), s.str()};
}

Outcome chaos_machinery() {
  double orth = 0.0;
  for (std::size_t d : {1u, 2u}) {
    const auto rule = gauss_hermite_rule(6);
    const auto indices = multi_indices_up_to(d, 5);
    // Tensor nodes enumerated as base-6 digits.
    const std::size_t total = d == 1 ? 6 : 36;
    for (const auto& a : indices) {
      for (const auto& b : indices) {
        double q = 0.0;
        for (std::size_t k = 0; k < total; ++k) {
          Point x(d);
          double w = 1.0;
          std::size_t code = k;
          for (std::size_t axis = 0; axis < d; ++axis) {
            x[axis] = rule.nodes[code % 6];
            w *= rule.weights[code % 6];
            code /= 6;
          }
          q += w * hermite_eval(a, x) * hermite_eval(b, x);
        }
        orth = std::max(orth, std::abs(q - (a == b ? a.factorial() : 0.0)));
      }
    }
  }

  struct Case {
    DiscreteMeasure mu;
    DiscreteMeasure nu;
    double t;
  };
  const std::vector<Case> cases = {{symmetric_two_point(), origin(), 100.0},
                                   {skewed_left(), skewed_right(), 50.0},
                                   {planar_two_point(), origin(2), 100.0}};
  double projection = 0.0;
  for (const auto& c : cases) {
    const std::size_t d = c.mu.dim();
    const auto closed = chaos_coefficients(c.mu, c.nu, c.t, 6);
    const auto numeric = project_numeric(
        [&](std::span<const double> x) { return theta_pointwise(c.mu, c.nu, c.t, x); }, d, 6,
        d == 1 ? 40 : 24);
    for (const auto& a : multi_indices_up_to(d, 6)) {
      projection = std::max(projection, std::abs(closed.coeff(a) - numeric.coeff(a)));
    }
  }

  bool exact = true;
  for (std::size_t d : {1u, 2u}) {
    for (int n : {0, 1, 2}) {
      const auto [mu, nu] = gen_matched_pair(n, d, 5);
      auto theta = chaos_coefficients(mu, nu, 3.0, 6);
      // The OU inverse needs a mean-zero expansion.
      theta.set(MultiIndex(std::vector<int>(d, 0)), 0.0);
      const auto back = ou_apply(ou_inverse(theta));
      for (const auto& [a, v] : theta.coeffs()) {
        if (a.degree() > 0) exact = exact && back.coeff(a) == v;
      }
    }
  }
  std::ostringstream s;
  s << "orthogonality error " << orth << " (<= 1e-10); closed form vs projection " << projection
    << " (<= 1e-8); OU round trip " << (exact ? "exact" : "inexact");
  return {orth <= 1e-10 && projection <= 1e-8 && exact, s.str()};
}

Outcome planar_sinkhorn() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_sweep(planar_two_point(), origin(2), Metric::W2sq, Method::Sinkhorn, 1e2, 1e3, 3);
  const double elapsed = seconds_since(start);
  const auto& last = r.rows.back();
  std::ostringstream s;
  s << "t W2^2 at 1e3 = " << last.rescaled_value << " (0.25, rtol 0.15); sweep " << elapsed
    << " s (< 300)";
  return {last.valid && within(last.rescaled_value, 0.25, 0.15) && elapsed < 300.0, s.str()};
}

Outcome divergence_inequalities() {
  struct Case {
    DiscreteMeasure mu;
    DiscreteMeasure nu;
  };
  const std::vector<Case> cases = {{symmetric_two_point(), origin()},
                                   {skewed_left(), skewed_right()},
                                   {origin(), unit_dirac()},
                                   {planar_two_point(), origin(2)}};
  int points = 0;
  int violations = 0;
  for (const auto& c : cases) {
    const auto tv = run_sweep(c.mu, c.nu, Metric::Tv, Method::Quadrature, 1e-1, 1e4, 11);
    const auto kl = run_sweep(c.mu, c.nu, Metric::Kl, Method::Quadrature, 1e-1, 1e4, 11);
    const auto chi2 = run_sweep(c.mu, c.nu, Metric::Chi2, Method::Quadrature, 1e-1, 1e4, 11);
    for (std::size_t k = 0; k < tv.rows.size(); ++k) {
      const double a = tv.rows[k].raw_value;
      const double b = kl.rows[k].raw_value;
      const double x = chi2.rows[k].raw_value;
      ++points;
      if (!(a * a <= b / 2.0) || !(b <= std::log1p(x))) ++violations;
    }
  }
  std::ostringstream s;
  s << violations << " violations of TV^2 <= KL/2 or KL <= log(1 + chi2) over " << points
    << " points";
  return {violations == 0, s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"W2 limit, symmetric pair", w2_limit_symmetric},
      {"W2 limit, skewed pair", w2_limit_skewed},
      {"chi2 and KL limits", chi2_kl_limits},
      {"TV limit", tv_limit},
      {"decay rates", decay_rates},
      {"chaos upper bound tightness", moser_tightness},
      {"dual lower bound", dual_lower_bound},
      {"Gaussian surrogate", gaussian_surrogate},
      {"zeroth-order translation", zeroth_order},
      {"chaos machinery", chaos_machinery},
      {"planar Sinkhorn", planar_sinkhorn},
      {"divergence inequalities", divergence_inequalities},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.details.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
