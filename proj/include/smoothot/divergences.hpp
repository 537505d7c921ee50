#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "smoothot/measures.hpp"

namespace smoothot {

enum class Method { Exact1d, Sinkhorn, Quadrature, MonteCarlo, ChaosBound, DualBound };
enum class FDivergence { Chi2, Kl, Tv };

std::string to_string(Method m);
std::string to_string(FDivergence k);
Method method_from_string(const std::string& s);
FDivergence fdivergence_from_string(const std::string& s);

/// Output of every numerical solver. `value` is finite and >= 0.
struct DivergenceResult {
  double value = 0.0;
  Method method = Method::Exact1d;
  std::optional<double> error_estimate;
  std::map<std::string, double> diagnostics;
};

nlohmann::json result_to_json(const DivergenceResult& r);

// ---------------------------------------------------------------------------
// Wasserstein distances

/// W_p between the smoothed 1-D measures from the quantile representation
///   W_p^p = int_0^1 |F_mu^{-1}(q) - F_nu^{-1}(q)|^p dq.
/// The q-grid is uniform in z = Phi^{-1}(q) on [-10, 10], which refines it
/// towards both endpoints. Composite Simpson on `grid` and 2 * grid intervals,
/// Richardson-combined; error_estimate is the difference of the two levels.
/// diagnostics["power_value"] carries W_p^p.
DivergenceResult wp_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t, double p,
                       int grid = 400);

struct SinkhornOptions {
  double marginal_tol = 1e-9;
  int max_iterations = 20000;
  double max_tail_mass = 1e-8;
};

/// Debiased entropic OT (Sinkhorn divergence)
///   S = OT_eps(a, b) - OT_eps(a, a) / 2 - OT_eps(b, b) / 2
/// between the mixtures binned on a tensor grid covering
/// [min atom - 8 sqrt t, max atom + 8 sqrt t] per axis, dim 1 or 2.
/// Log-domain updates with the squared-Euclidean cost split per axis, and
/// geometric eps-scaling down to the requested eps.
/// Throws ConvergenceError if the L1 marginal violation stays above tolerance.
DivergenceResult sinkhorn_w2(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                             int grid_per_axis, double eps, const SinkhornOptions& opts = {});

// ---------------------------------------------------------------------------
// f-divergences

/// chi^2 = int (f - g)^2 / g, KL = int f log(f / g), TV = (1/2) int |f - g|
/// between f = mu * rho_t and g = nu * rho_t.
///
/// Quadrature (dim <= 2): adaptive Gauss-Kronrod over
/// [min atom - 10 sqrt t, max atom + 10 sqrt t]; `budget` caps subdivisions.
/// Monte Carlo (any dim): importance sampling from (f + g) / 2 with `budget`
/// draws; error_estimate is the standard error.
/// diagnostics["converged"] is 0 when the budget ran out before tolerance.
DivergenceResult f_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                              FDivergence kind, Method method, std::int64_t budget,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Chaos bounds

/// W_2^2 <= exp((E|X - v|^2 v E|Y - v|^2) / 2t) * (-int w L w dg), with the
/// energy summed over the recentred chaos expansion up to degree K.
/// diagnostics["tail_bound"] bounds the energy of the omitted degrees > K.
/// Throws InvalidInput when the means differ.
DivergenceResult moser_w2_upper_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      double t, int max_degree = 6);

/// C-infinity radial profile: 1 on |x| <= 1, 0 on |x| >= 2, |grad| <= 2.
double smooth_bump(std::span<const double> x);
std::vector<double> smooth_bump_gradient(std::span<const double> x);

/// Kantorovich-Rubinstein lower bound on W_1 with the test function
///   f(x) = phi(x / sqrt t) Theta_t(x / sqrt t):
/// value = |int f d(mu * rho_t - nu * rho_t)| / L, where L is 1.1 times the
/// largest |grad f| seen on a `grid`^d lattice over the support of phi.
/// dim 1 or 2; the means must agree (both measures are recentred).
DivergenceResult w1_dual_lower_bound(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     double t, int grid = 401);

}  // namespace smoothot
