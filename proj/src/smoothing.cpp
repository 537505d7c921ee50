#include "smoothot/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "smoothot/errors.hpp"

namespace smoothot {

SmoothedMeasure::SmoothedMeasure(DiscreteMeasure base, double t) : base_(std::move(base)), t_(t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("smoothing bandwidth t must be positive");
}

// ---------------------------------------------------------------------------
// Standard normal

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log_normal_cdf(double z) {
  if (z > 5.0) return std::log1p(-normal_sf(z));
  if (z > -30.0) return std::log(normal_cdf(z));
  // Mills-ratio asymptotic series.
  const double z2 = z * z;
  const double inv = 1.0 / z2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
  return -0.5 * z2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-z) + std::log(series);
}

namespace {

double log_sum_exp(const std::vector<double>& terms) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : terms) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : terms) s += std::exp(v - m);
  return m + std::log(s);
}

void require_dim(const SmoothedMeasure& s, std::span<const double> x) {
  if (x.size() != s.dim()) throw InvalidInput("point dimension does not match measure");
}

void require_1d(const SmoothedMeasure& s) {
  if (s.dim() != 1) throw InvalidInput("operation requires a one-dimensional measure");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r2 += (a[i] - b[i]) * (a[i] - b[i]);
  return r2;
}

}  // namespace

double log_density(const SmoothedMeasure& s, std::span<const double> x) {
  require_dim(s, x);
  const double t = s.bandwidth();
  std::vector<double> terms;
  terms.reserve(s.base().size());
  for (const auto& a : s.base().atoms()) {
    terms.push_back(std::log(a.w) - squared_distance(x, a.x) / (2.0 * t));
  }
  return log_sum_exp(terms) -
         0.5 * static_cast<double>(s.dim()) * std::log(2.0 * std::numbers::pi * t);
}

double density(const SmoothedMeasure& s, std::span<const double> x) {
  return std::exp(log_density(s, x));
}

double density_difference(const SmoothedMeasure& a, const SmoothedMeasure& b,
                          std::span<const double> x) {
  require_dim(a, x);
  require_dim(b, x);
  if (a.bandwidth() != b.bandwidth()) {
    throw InvalidInput("density_difference: bandwidths differ");
  }
  const double t = a.bandwidth();
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto* m : {&a.base(), &b.base()}) {
    for (const auto& atom : m->atoms()) {
      shift = std::max(shift, -squared_distance(x, atom.x) / (2.0 * t));
    }
  }
  double diff = 0.0;
  for (const auto& atom : a.base().atoms()) {
    diff += atom.w * std::exp(-squared_distance(x, atom.x) / (2.0 * t) - shift);
  }
  for (const auto& atom : b.base().atoms()) {
    diff -= atom.w * std::exp(-squared_distance(x, atom.x) / (2.0 * t) - shift);
  }
  const double log_norm = -0.5 * static_cast<double>(a.dim()) * std::log(2.0 * std::numbers::pi * t);
  return diff * std::exp(shift + log_norm);
}

// ---------------------------------------------------------------------------
// One-dimensional CDF and quantiles

double cdf_1d(const SmoothedMeasure& s, double x) {
  require_1d(s);
  const double sd = std::sqrt(s.bandwidth());
  double c = 0.0;
  for (const auto& a : s.base().atoms()) c += a.w * normal_cdf((x - a.x[0]) / sd);
  return c;
}

double sf_1d(const SmoothedMeasure& s, double x) {
  require_1d(s);
  const double sd = std::sqrt(s.bandwidth());
  double c = 0.0;
  for (const auto& a : s.base().atoms()) c += a.w * normal_sf((x - a.x[0]) / sd);
  return c;
}

double log_cdf_1d(const SmoothedMeasure& s, double x) {
  require_1d(s);
  const double sd = std::sqrt(s.bandwidth());
  std::vector<double> terms;
  for (const auto& a : s.base().atoms()) {
    terms.push_back(std::log(a.w) + log_normal_cdf((x - a.x[0]) / sd));
  }
  return log_sum_exp(terms);
}

double log_sf_1d(const SmoothedMeasure& s, double x) {
  require_1d(s);
  const double sd = std::sqrt(s.bandwidth());
  std::vector<double> terms;
  for (const auto& a : s.base().atoms()) {
    terms.push_back(std::log(a.w) + log_normal_cdf(-(x - a.x[0]) / sd));
  }
  return log_sum_exp(terms);
}

double quantile_1d(const SmoothedMeasure& s, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("quantile_1d: q must lie in (0, 1)");
  return quantile_1d_tails(s, q, 1.0 - q);
}

double quantile_1d_tails(const SmoothedMeasure& s, double lower, double upper) {
  require_1d(s);
  if (!(lower > 0.0 && upper > 0.0)) {
    throw InvalidInput("quantile_1d: level must lie strictly inside (0, 1)");
  }
  const bool use_lower = lower <= upper;
  const double log_target = std::log(use_lower ? lower : upper);

  // g is increasing in x on both branches; g(root) = 0.
  auto g_and_slope = [&](double x) -> std::pair<double, double> {
    const double x1[1] = {x};
    const double log_f = log_density(s, x1);
    if (use_lower) {
      const double lc = log_cdf_1d(s, x);
      return {lc - log_target, std::exp(log_f - lc)};
    }
    const double ls = log_sf_1d(s, x);
    return {log_target - ls, std::exp(log_f - ls)};
  };

  const auto& atoms = s.base().atoms();
  const double sd = std::sqrt(s.bandwidth());
  double lo = atoms.front().x[0] - 12.0 * sd;
  double hi = atoms.back().x[0] + 12.0 * sd;
  while (g_and_slope(lo).first > 0.0) lo -= 12.0 * sd;
  while (g_and_slope(hi).first < 0.0) hi += 12.0 * sd;

  const Point m = s.base().mean();
  double x = std::clamp(m[0], lo, hi);
  for (int it = 0; it < 400; ++it) {
    const auto [g, slope] = g_and_slope(x);
    if (g == 0.0) return x;
    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = x - g / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Theta_t

namespace {

void require_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                  std::span<const double> x) {
  if (!(t > 0.0)) throw InvalidInput("theta: t must be positive");
  if (mu.dim() != nu.dim() || x.size() != mu.dim()) throw InvalidInput("theta: dimension mismatch");
}

// eta(x, X / sqrt t) - 1 for one atom.
double eta_minus_one(std::span<const double> x, const Point& atom, double t) {
  const double rt = std::sqrt(t);
  double inner = 0.0;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    inner += x[i] * atom[i] / rt;
    norm2 += atom[i] * atom[i] / t;
  }
  return std::expm1(inner - 0.5 * norm2);
}

}  // namespace

double theta_pointwise(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                       std::span<const double> x) {
  require_pair(mu, nu, t, x);
  // sum w (eta - 1) keeps full precision when the two expectations nearly cancel.
  double acc = 0.0;
  double mass = 0.0;
  for (const auto& a : mu.atoms()) {
    acc += a.w * eta_minus_one(x, a.x, t);
    mass += a.w;
  }
  for (const auto& a : nu.atoms()) {
    acc -= a.w * eta_minus_one(x, a.x, t);
    mass -= a.w;
  }
  return std::sqrt(t) * (acc + mass);
}

std::vector<double> theta_gradient(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double t, std::span<const double> x) {
  require_pair(mu, nu, t, x);
  std::vector<double> grad(x.size(), 0.0);
  auto accumulate = [&](const DiscreteMeasure& m, double sign) {
    for (const auto& a : m.atoms()) {
      const double eta = 1.0 + eta_minus_one(x, a.x, t);
      for (std::size_t i = 0; i < x.size(); ++i) grad[i] += sign * a.w * a.x[i] * eta;
    }
  };
  accumulate(mu, 1.0);
  accumulate(nu, -1.0);
  return grad;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Point> sample(const SmoothedMeasure& s, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidInput("sample: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  for (const auto& a : s.base().atoms()) weights.push_back(a.w);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> noise(0.0, std::sqrt(s.bandwidth()));
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Point p = s.base().atoms()[pick(rng)].x;
    for (auto& c : p) c += noise(rng);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace smoothot
