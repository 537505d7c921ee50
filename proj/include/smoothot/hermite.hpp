#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "smoothot/measures.hpp"

namespace smoothot {

/// Probabilists' Hermite polynomial He_m(x), three-term recurrence
/// He_{m+1} = x He_m - m He_{m-1}.
double hermite(int m, double x);
/// He_0(x) .. He_max(x).
std::vector<double> hermite_table(int max_degree, double x);
/// H_alpha(x) = prod_i He_{alpha_i}(x_i).
double hermite_eval(const MultiIndex& alpha, std::span<const double> x);

/// Gauss rule for the standard normal weight: sum_i weights[i] p(nodes[i]) equals
/// E p(Z) for every polynomial p of degree <= 2 * order - 1. Weights sum to 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
};

/// Golub-Welsch: eigenvalues of the symmetric Jacobi matrix (zero diagonal,
/// off-diagonal sqrt(k)) give the nodes; each node is then Newton-polished on
/// He_m and its weight recomputed from the normalised recurrence.
QuadratureRule gauss_hermite_rule(int order);

/// Sparse Hermite expansion f = sum_alpha c_alpha H_alpha truncated at |alpha| <= max_degree.
class ChaosExpansion {
 public:
  ChaosExpansion(std::size_t dim, int max_degree);

  std::size_t dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  const std::map<MultiIndex, double>& coeffs() const { return coeffs_; }

  /// 0 for indices that are not stored.
  double coeff(const MultiIndex& alpha) const;
  /// On an expansion with ou_power() != 0 the value is stored through its
  /// base coefficient c / (-|alpha|)^k; degree-0 entries must then be 0.
  void set(const MultiIndex& alpha, double c);

  /// Number of Ornstein-Uhlenbeck applications (negative for inverses) carried
  /// by this expansion. Coefficients are kept as base * (-|alpha|)^k with the
  /// base untouched, so L and its inverse undo each other bit for bit.
  int ou_power() const { return ou_power_; }
  ChaosExpansion with_ou_power(int k) const;

  /// Degree-m slice (the m-th chaos projection).
  ChaosExpansion slice(int degree) const;
  double evaluate(std::span<const double> x) const;

  /// L^2(g) squared norm, sum alpha! c_alpha^2.
  double l2_norm_squared() const;

 private:
  std::size_t dim_;
  int max_degree_;
  std::map<MultiIndex, double> coeffs_;
  std::map<MultiIndex, double> base_;
  int ou_power_ = 0;

  double scaled(const MultiIndex& alpha, double base) const;
};

/// Exact Hermite coefficients of the rescaled density difference
///   Theta_t(x) = sqrt(t) (E eta(x, X / sqrt t) - E eta(x, Y / sqrt t)),
///   eta(x, y) = exp(<x, y> - |y|^2 / 2),
/// via the generating function: c_alpha = t^{(1 - |alpha|)/2} (E X^alpha - E Y^alpha) / alpha!.
/// Only indices with a nonzero moment difference are stored.
ChaosExpansion chaos_coefficients(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                                  int max_degree);

/// Total tensor-grid nodes project_numeric may use.
inline constexpr long long kTensorQuadratureBudget = 1'000'000;

/// c_alpha = (1/alpha!) E[f(Z) H_alpha(Z)] by tensor-product Gauss-Hermite with
/// `nodes_per_axis` nodes. Exact when f is a polynomial and 2m - 1 >= deg f + K.
ChaosExpansion project_numeric(const std::function<double(std::span<const double>)>& f,
                               std::size_t dim, int max_degree, int nodes_per_axis);

/// Forward Ornstein-Uhlenbeck operator on the truncated chaos: c_alpha -> -|alpha| c_alpha.
ChaosExpansion ou_apply(const ChaosExpansion& w);
/// Spectral pseudo-inverse: c_alpha -> -c_alpha / |alpha|. Throws InvalidInput
/// if the degree-0 coefficient exceeds 1e-10 in magnitude.
ChaosExpansion ou_inverse(const ChaosExpansion& theta);

/// -int w L w dg for L w = theta, i.e. sum (alpha! / |alpha|) c_alpha^2.
double dirichlet_energy(const ChaosExpansion& theta);
/// int theta^2 dg = sum alpha! c_alpha^2.
double theta_l2(const ChaosExpansion& theta);

nlohmann::json chaos_to_json(const ChaosExpansion& c);
ChaosExpansion chaos_from_json(const nlohmann::json& j);

}  // namespace smoothot
