#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "smoothot/divergences.hpp"
#include "smoothot/limits.hpp"
#include "smoothot/measures.hpp"

namespace smoothot {

/// Quantity evaluated along a sweep. SurrogateGap is |W_2 - W_2(Gaussian surrogates)|.
enum class Metric { W1, W2, W2sq, Chi2, Kl, Tv, SurrogateGap };

std::string to_string(Metric m);
Metric metric_from_string(const std::string& s);

/// Solver settings shared by sweeps and the CLI.
struct SolverSettings {
  int wp_grid = 400;
  int sinkhorn_grid = 64;
  // Entropic regularisation as a multiple of t.
  double sinkhorn_eps_ratio = 0.25;
  std::int64_t quadrature_budget = 20000;
  std::int64_t montecarlo_samples = 200000;
  int moser_degree = 6;
  int dual_grid = 401;
  LimitOptions limits;
};

/// One evaluation of `metric` at bandwidth t with `method`.
DivergenceResult evaluate_metric(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 Metric metric, Method method, double t,
                                 const SolverSettings& settings, std::uint64_t seed);

struct SweepRow {
  double t = 0.0;
  double raw_value = 0.0;
  double rescale_exponent = 0.0;
  double rescaled_value = 0.0;  // raw_value * t^rescale_exponent
  double predicted_limit = 0.0;  // NaN when no closed form exists
  double error_estimate = 0.0;   // NaN when the solver gives none
  bool valid = true;
  std::string error;  // solver message for invalid rows
};

struct SweepReport {
  std::string pair_id;
  Metric metric = Metric::W2sq;
  Method method = Method::Exact1d;
  std::vector<SweepRow> rows;  // ascending t
  double fitted_exponent = 0.0;
  double fit_stderr = 0.0;
};

struct SweepConfig {
  Metric metric = Metric::W2sq;
  Method method = Method::Exact1d;
  double t_min = 1e2;
  double t_max = 1e4;
  int points = 7;
  std::uint64_t seed = 0;
  std::string pair_id = "pair";
  SolverSettings settings;
};

/// Rescaling exponent and predicted limit of `metric` for the given constants.
std::pair<double, double> rescaling_for(Metric metric, const LimitConstants& limits,
                                        const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Geometric grid t_k = t_min (t_max / t_min)^{k / (points - 1)}. Rows are
/// independent and run concurrently; row k uses seed ^ k. Failed rows are kept
/// (valid = false) and excluded from the fit. Throws IndistinguishableMeasures
/// when the pair matches through the degree cap, NumericError when fewer than
/// three rows survive.
SweepReport sweep(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SweepConfig& config);

/// Least-squares slope of log raw_value on log t and its standard error, over
/// valid rows with positive values. Throws NumericError with fewer than 3 rows.
std::pair<double, double> fit_rate(const SweepReport& report);
std::pair<double, double> fit_power_law(const std::vector<double>& t, const std::vector<double>& y);

enum class Theorem { W2Limit, Chi2Limit, KlLimit, TvLimit, WpRate, GaussianSurrogate, ZerothOrder };

std::string to_string(Theorem th);
Theorem theorem_from_string(const std::string& s);

/// For limit checks pass == |observed - expected| <= rtol |expected|. For
/// wp_rate the tolerance is absolute on the fitted exponent. For
/// gaussian_surrogate, observed is the largest t |W_2 - W_2^gauss| on the grid
/// and expected is twice its value at the smallest t; pass == observed <= expected.
struct VerifyVerdict {
  Theorem theorem = Theorem::W2Limit;
  bool pass = false;
  bool precondition_failed = false;
  double observed = 0.0;
  double expected = 0.0;
  double rtol = 0.0;
  std::string details;
};

struct VerifyConfig {
  double t_min = 1e2;
  double t_max = 1e4;
  int points = 7;
  SolverSettings settings;
};

/// Runs the canonical sweep for `theorem` and judges it. `budget` is the
/// Monte Carlo sample count (f-divergences in d > 2, and the TV constant).
/// Precondition violations produce pass = false with precondition_failed set.
VerifyVerdict verify(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Theorem theorem,
                     double rtol, std::int64_t budget, std::uint64_t seed,
                     const VerifyConfig& config = {}, SweepReport* report_out = nullptr);

/// Re-derives a verdict from a sweep report alone.
VerifyVerdict verdict_from_report(const SweepReport& report, Theorem theorem, double rtol);

inline constexpr const char* kReportCsvHeader =
    "t,raw_value,rescale_exponent,rescaled_value,predicted_limit,error_estimate";

std::string report_to_csv(const SweepReport& report);
void write_report(const SweepReport& report, const std::filesystem::path& path);
/// Reads the CSV written by write_report (rows only; metadata is not stored).
SweepReport read_report(const std::filesystem::path& path);
/// Two-column "t rescaled_value" file for gnuplot.
void write_plot_data(const SweepReport& report, const std::filesystem::path& path);

nlohmann::json report_to_json(const SweepReport& report);
nlohmann::json verdict_to_json(const VerifyVerdict& v);

}  // namespace smoothot
