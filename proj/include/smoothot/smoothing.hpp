#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "smoothot/measures.hpp"

namespace smoothot {

/// The Gaussian mixture mu * rho_t: each atom carries an isotropic normal
/// component with covariance t * I.
class SmoothedMeasure {
 public:
  /// Throws InvalidInput unless t > 0.
  SmoothedMeasure(DiscreteMeasure base, double t);

  const DiscreteMeasure& base() const { return base_; }
  double bandwidth() const { return t_; }
  std::size_t dim() const { return base_.dim(); }

 private:
  DiscreteMeasure base_;
  double t_;
};

/// Standard normal helpers; the log forms stay accurate deep in the tails.
double normal_cdf(double z);
double normal_sf(double z);
double log_normal_cdf(double z);

/// log of the mixture density, evaluated with a max shift so it is finite
/// (and free of overflow) for any finite x.
double log_density(const SmoothedMeasure& s, std::span<const double> x);
double density(const SmoothedMeasure& s, std::span<const double> x);

/// Mixture density difference (mu * rho_t - nu * rho_t)(x) from a shared max
/// shift. Both measures must have the same bandwidth.
double density_difference(const SmoothedMeasure& a, const SmoothedMeasure& b,
                          std::span<const double> x);

/// Mixture CDF sum_i w_i Phi((x - x_i) / sqrt t). Requires dim == 1.
double cdf_1d(const SmoothedMeasure& s, double x);
/// 1 - cdf_1d, computed without cancellation.
double sf_1d(const SmoothedMeasure& s, double x);
double log_cdf_1d(const SmoothedMeasure& s, double x);
double log_sf_1d(const SmoothedMeasure& s, double x);

/// Inverse of cdf_1d for q in (0, 1): log-space safeguarded Newton inside the
/// bracket [min atom - 12 sqrt t, max atom + 12 sqrt t].
double quantile_1d(const SmoothedMeasure& s, double q);
/// Same inverse, but the target is given as the pair (q, 1 - q) so that upper
/// tail levels keep full relative precision. Solves on whichever side is smaller.
double quantile_1d_tails(const SmoothedMeasure& s, double lower, double upper);

/// Theta_t(x) = sqrt(t) (E eta(x, X / sqrt t) - E eta(x, Y / sqrt t)) with
/// eta(x, y) = exp(<x, y> - |y|^2 / 2); satisfies
///   (mu * rho_t - nu * rho_t)(x) = t^{-1/2} Theta_t(x / sqrt t) rho_t(x).
double theta_pointwise(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                       std::span<const double> x);
/// Gradient of Theta_t in x: E X eta(x, X / sqrt t) - E Y eta(x, Y / sqrt t).
std::vector<double> theta_gradient(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double t, std::span<const double> x);

/// `count` draws: component by weight, then N(0, t I) jitter. Bit-identical for a given seed.
std::vector<Point> sample(const SmoothedMeasure& s, std::size_t count, std::uint64_t seed);

}  // namespace smoothot
