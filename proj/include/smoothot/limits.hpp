#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "smoothot/measures.hpp"

namespace smoothot {

struct LimitOptions {
  int degree_cap = 12;
  double match_tol = 1e-9;
  // Standard-normal draws for the total-variation constant (antithetic pairs
  // count as two draws).
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
};

/// Limiting constants of the rescaled divergences as t -> infinity under
/// matching order n:
///   t^n W_2^2 -> c_w2,  t^{n+1} chi^2 -> c_chi2,  t^{n+1} KL -> c_kl,
///   t^{(n+1)/2} TV -> c_tv.
/// The rate fields are the exponents of t used for the rescaling.
struct LimitConstants {
  int n = 0;
  double c_w2 = 0.0;
  double c_chi2 = 0.0;
  double c_kl = 0.0;
  double c_tv = 0.0;
  double c_tv_stderr = 0.0;
  // Piecewise quadrature between the roots of the limiting polynomial; 1-D only.
  std::optional<double> c_tv_quadrature;
  double rate_w2 = 0.0;
  double rate_chi2 = 0.0;
  double rate_kl = 0.0;
  double rate_tv = 0.0;

  /// Best available TV constant: quadrature when present, Monte Carlo otherwise.
  double tv_reference() const { return c_tv_quadrature.value_or(c_tv); }
};

/// Throws IndistinguishableMeasures if the pair matches through the degree cap.
LimitConstants limit_constants(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const LimitOptions& opts = {});

/// Monte Carlo estimate of (1/2) E|P(Z)| for P = sum_{|a| = n+1} (dM_a / a!) H_a,
/// Z ~ N(0, I), antithetic pairs (Z, -Z). Returns (mean, standard error).
std::pair<double, double> tv_constant_montecarlo(const std::map<MultiIndex, double>& slice,
                                                 std::size_t dim, std::int64_t samples,
                                                 std::uint64_t seed);
/// Same constant in 1-D by adaptive quadrature between the roots of He_{n+1}.
double tv_constant_quadrature_1d(double coefficient, int degree);

/// W_2 between N(m_mu, S_mu + t I) and N(m_nu, S_nu + t I):
///   |dm|^2 + tr(A + B - 2 (B^{1/2} A B^{1/2})^{1/2}).
double gaussian_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t);

nlohmann::json limits_to_json(const LimitConstants& c);

}  // namespace smoothot
