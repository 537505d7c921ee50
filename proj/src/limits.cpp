#include "smoothot/limits.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "smoothot/errors.hpp"
#include "smoothot/hermite.hpp"
#include "smoothot/quadrature.hpp"

namespace smoothot {

namespace {

constexpr double kTailCut = 40.0;

double standard_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

std::pair<double, double> tv_constant_montecarlo(const std::map<MultiIndex, double>& slice,
                                                 std::size_t dim, std::int64_t samples,
                                                 std::uint64_t seed) {
  if (samples < 2) throw InvalidInput("tv_constant_montecarlo: need at least 2 samples");
  int degree = 0;
  for (const auto& [alpha, c] : slice) degree = std::max(degree, alpha.degree());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> tables(dim);
  std::vector<double> z(dim);

  auto abs_poly = [&](double sign) {
    for (std::size_t i = 0; i < dim; ++i) tables[i] = hermite_table(degree, sign * z[i]);
    double p = 0.0;
    for (const auto& [alpha, c] : slice) {
      double h = 1.0;
      for (std::size_t i = 0; i < dim; ++i) h *= tables[i][alpha[i]];
      p += c * h;
    }
    return std::abs(p);
  };

  const std::int64_t pairs = samples / 2;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t k = 0; k < pairs; ++k) {
    for (auto& zi : z) zi = normal(rng);
    const double v = 0.25 * (abs_poly(1.0) + abs_poly(-1.0));
    // Welford update.
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  const double var = pairs > 1 ? m2 / static_cast<double>(pairs - 1) : 0.0;
  return {mean, std::sqrt(var / static_cast<double>(pairs))};
}

double tv_constant_quadrature_1d(double coefficient, int degree) {
  if (degree < 1) throw InvalidInput("tv_constant_quadrature_1d: degree must be >= 1");
  // The roots of He_k are exactly the k-point Gauss-Hermite nodes.
  const auto roots = gauss_hermite_rule(degree).nodes;
  std::vector<double> breaks;
  breaks.push_back(-kTailCut);
  breaks.insert(breaks.end(), roots.begin(), roots.end());
  breaks.push_back(kTailCut);
  AdaptiveOptions opts;
  opts.rel_tol = 1e-13;
  opts.initial_panels = 8;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    total += integrate_adaptive(
                 [&](double z) { return std::abs(hermite(degree, z)) * standard_normal_pdf(z); },
                 breaks[k], breaks[k + 1], opts)
                 .value;
  }
  return 0.5 * std::abs(coefficient) * total;
}

LimitConstants limit_constants(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const LimitOptions& opts) {
  if (mu.dim() != nu.dim()) throw InvalidInput("limit_constants: dimension mismatch");
  const int n = matching_order(mu, nu, opts.degree_cap, opts.match_tol).order();
  const std::size_t dim = mu.dim();

  LimitConstants out;
  out.n = n;
  out.rate_w2 = n;
  out.rate_chi2 = n + 1;
  out.rate_kl = n + 1;
  out.rate_tv = 0.5 * (n + 1);

  // Degree-(n+1) slice of the limiting polynomial, coefficients dM_a / a!.
  std::map<MultiIndex, double> slice;
  if (n == 0) {
    const Point ma = mu.mean();
    const Point mb = nu.mean();
    double gap2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      gap2 += (ma[i] - mb[i]) * (ma[i] - mb[i]);
      std::vector<int> e(dim, 0);
      e[i] = 1;
      slice.emplace(MultiIndex(e), ma[i] - mb[i]);
    }
    out.c_chi2 = gap2;
    out.c_w2 = gap2;
  } else {
    double sum = 0.0;
    for (const auto& alpha : multi_indices_of_degree(dim, n + 1)) {
      const double delta = moment(mu, alpha) - moment(nu, alpha);
      sum += delta * delta / alpha.factorial();
      slice.emplace(alpha, delta / alpha.factorial());
    }
    out.c_chi2 = sum;
    out.c_w2 = sum / (n + 1);
  }
  out.c_kl = out.c_chi2 / 2.0;

  const auto [tv, stderr_tv] = tv_constant_montecarlo(slice, dim, opts.mc_samples, opts.seed);
  out.c_tv = tv;
  out.c_tv_stderr = stderr_tv;
  if (dim == 1) {
    out.c_tv_quadrature = tv_constant_quadrature_1d(slice.begin()->second, n + 1);
  }
  return out;
}

double gaussian_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t) {
  if (mu.dim() != nu.dim()) throw InvalidInput("gaussian_w2: dimension mismatch");
  if (!(t >= 0.0)) throw InvalidInput("gaussian_w2: t must be nonnegative");
  const std::size_t d = mu.dim();
  const Point ma = mu.mean();
  const Point mb = nu.mean();
  double gap2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) gap2 += (ma[i] - mb[i]) * (ma[i] - mb[i]);

  const Eigen::MatrixXd A = mu.covariance() + t * Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd B = nu.covariance() + t * Eigen::MatrixXd::Identity(d, d);

  if (d == 1) {
    // (sqrt a - sqrt b)^2 = (a - b)^2 / (sqrt a + sqrt b)^2 avoids cancellation.
    const double a = std::max(A(0, 0), 0.0);
    const double b = std::max(B(0, 0), 0.0);
    const double denom = std::sqrt(a) + std::sqrt(b);
    const double bures = denom > 0.0 ? (a - b) * (a - b) / (denom * denom) : 0.0;
    return std::sqrt(gap2 + bures);
  }

  auto psd_sqrt = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) {
      throw NumericError("gaussian_w2: symmetric eigen-solve did not converge");
    }
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXd(es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose());
  };
  const Eigen::MatrixXd rb = psd_sqrt(B);
  Eigen::MatrixXd cross = rb * A * rb;
  cross = 0.5 * (cross + cross.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cross, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("gaussian_w2: symmetric eigen-solve did not converge");
  }
  const double cross_trace = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double bures = std::max(0.0, A.trace() + B.trace() - 2.0 * cross_trace);
  return std::sqrt(gap2 + bures);
}

nlohmann::json limits_to_json(const LimitConstants& c) {
  nlohmann::json j = {{"n", c.n},           {"c_w2", c.c_w2},       {"c_chi2", c.c_chi2},
                      {"c_kl", c.c_kl},     {"c_tv", c.c_tv},       {"c_tv_stderr", c.c_tv_stderr},
                      {"rate_w2", c.rate_w2}, {"rate_chi2", c.rate_chi2},
                      {"rate_kl", c.rate_kl}, {"rate_tv", c.rate_tv}};
  j["c_tv_quadrature"] = c.c_tv_quadrature ? nlohmann::json(*c.c_tv_quadrature) : nlohmann::json();
  return j;
}

}  // namespace smoothot
