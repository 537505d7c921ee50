#include "smoothot/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "smoothot/errors.hpp"

namespace smoothot {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double mean_gap(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const Point a = mu.mean();
  const Point b = nu.mean();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

DivergenceResult w2_result(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Method method,
                           double t, const SolverSettings& s) {
  switch (method) {
    case Method::Exact1d:
      return wp_1d(mu, nu, t, 2.0, s.wp_grid);
    case Method::Sinkhorn:
      return sinkhorn_w2(mu, nu, t, s.sinkhorn_grid, s.sinkhorn_eps_ratio * t);
    case Method::ChaosBound: {
      DivergenceResult r = moser_w2_upper_bound(mu, nu, t, s.moser_degree);
      r.diagnostics["power_value"] = r.value;
      const double sq = r.error_estimate.value_or(0.0);
      r.value = std::sqrt(r.value);
      r.error_estimate = r.value > 0.0 ? sq / (2.0 * r.value) : 0.0;
      return r;
    }
    default:
      throw InvalidInput("method " + to_string(method) + " does not compute W2");
  }
}

VerifyVerdict precondition_failure(Theorem th, double rtol, const std::string& why) {
  VerifyVerdict v;
  v.theorem = th;
  v.pass = false;
  v.precondition_failed = true;
  v.observed = kNaN;
  v.expected = kNaN;
  v.rtol = rtol;
  v.details = "precondition: " + why;
  return v;
}

}  // namespace

std::string to_string(Metric m) {
  switch (m) {
    case Metric::W1: return "w1";
    case Metric::W2: return "w2";
    case Metric::W2sq: return "w2sq";
    case Metric::Chi2: return "chi2";
    case Metric::Kl: return "kl";
    case Metric::Tv: return "tv";
    case Metric::SurrogateGap: return "surrogate_gap";
  }
  return "unknown";
}

Metric metric_from_string(const std::string& s) {
  for (Metric m : {Metric::W1, Metric::W2, Metric::W2sq, Metric::Chi2, Metric::Kl, Metric::Tv,
                   Metric::SurrogateGap}) {
    if (to_string(m) == s) return m;
  }
  throw InvalidInput("unknown metric '" + s + "'");
}

std::string to_string(Theorem th) {
  switch (th) {
    case Theorem::W2Limit: return "w2_limit";
    case Theorem::Chi2Limit: return "chi2_limit";
    case Theorem::KlLimit: return "kl_limit";
    case Theorem::TvLimit: return "tv_limit";
    case Theorem::WpRate: return "wp_rate";
    case Theorem::GaussianSurrogate: return "gaussian_surrogate";
    case Theorem::ZerothOrder: return "zeroth_order";
  }
  return "unknown";
}

Theorem theorem_from_string(const std::string& s) {
  for (Theorem th : {Theorem::W2Limit, Theorem::Chi2Limit, Theorem::KlLimit, Theorem::TvLimit,
                     Theorem::WpRate, Theorem::GaussianSurrogate, Theorem::ZerothOrder}) {
    if (to_string(th) == s) return th;
  }
  throw InvalidInput("unknown theorem '" + s + "'");
}

DivergenceResult evaluate_metric(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                 Metric metric, Method method, double t,
                                 const SolverSettings& s, std::uint64_t seed) {
  switch (metric) {
    case Metric::W1:
      if (method == Method::Exact1d) return wp_1d(mu, nu, t, 1.0, s.wp_grid);
      if (method == Method::DualBound) return w1_dual_lower_bound(mu, nu, t, s.dual_grid);
      throw InvalidInput("metric w1 needs method exact1d or dual_bound");
    case Metric::W2:
      return w2_result(mu, nu, method, t, s);
    case Metric::W2sq: {
      DivergenceResult r = w2_result(mu, nu, method, t, s);
      const double w = r.value;
      r.value = w * w;
      if (r.error_estimate) r.error_estimate = 2.0 * w * *r.error_estimate;
      return r;
    }
    case Metric::Chi2:
    case Metric::Kl:
    case Metric::Tv: {
      const FDivergence kind = metric == Metric::Chi2 ? FDivergence::Chi2
                               : metric == Metric::Kl ? FDivergence::Kl
                                                      : FDivergence::Tv;
      if (method == Method::Quadrature) {
        return f_divergence(mu, nu, t, kind, method, s.quadrature_budget, seed);
      }
      if (method == Method::MonteCarlo) {
        return f_divergence(mu, nu, t, kind, method, s.montecarlo_samples, seed);
      }
      throw InvalidInput("f-divergences need method quadrature or montecarlo");
    }
    case Metric::SurrogateGap: {
      if (method != Method::Exact1d && method != Method::Sinkhorn) {
        throw InvalidInput("metric surrogate_gap needs method exact1d or sinkhorn");
      }
      DivergenceResult r = w2_result(mu, nu, method, t, s);
      const double gauss = gaussian_w2(mu, nu, t);
      r.diagnostics["w2"] = r.value;
      r.diagnostics["gaussian_w2"] = gauss;
      r.value = std::abs(r.value - gauss);
      return r;
    }
  }
  throw InvalidInput("unknown metric");
}

std::pair<double, double> rescaling_for(Metric metric, const LimitConstants& c,
                                        const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const double n = c.n;
  switch (metric) {
    case Metric::W1:
      return {0.5 * n, c.n == 0 ? mean_gap(mu, nu) : kNaN};
    case Metric::W2:
      return {0.5 * n, std::sqrt(c.c_w2)};
    case Metric::W2sq:
      return {n, c.c_w2};
    case Metric::Chi2:
      return {n + 1.0, c.c_chi2};
    case Metric::Kl:
      return {n + 1.0, c.c_kl};
    case Metric::Tv:
      return {0.5 * (n + 1.0), c.tv_reference()};
    case Metric::SurrogateGap:
      return {1.0, kNaN};
  }
  return {0.0, kNaN};
}

std::pair<double, double> fit_power_law(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw InvalidInput("fit_power_law: size mismatch");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(t[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const std::size_t m = lx.size();
  if (m < 3) throw NumericError("fit error: fewer than 3 rows with positive values");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw NumericError("fit error: t values are not distinct");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    rss += r * r;
  }
  const double se = std::sqrt(rss / static_cast<double>(m - 2) / sxx);
  return {slope, se};
}

std::pair<double, double> fit_rate(const SweepReport& report) {
  std::vector<double> t;
  std::vector<double> y;
  for (const auto& row : report.rows) {
    if (!row.valid) continue;
    t.push_back(row.t);
    y.push_back(row.raw_value);
  }
  return fit_power_law(t, y);
}

SweepReport sweep(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SweepConfig& config) {
  if (!(config.t_min > 0.0) || !(config.t_min < config.t_max)) {
    throw InvalidInput("sweep: need 0 < t_min < t_max");
  }
  if (config.points < 3) throw InvalidInput("sweep: need at least 3 points");
  if (mu.dim() != nu.dim()) throw InvalidInput("sweep: dimension mismatch");

  LimitOptions lopts = config.settings.limits;
  lopts.seed = config.seed;
  const LimitConstants constants = limit_constants(mu, nu, lopts);
  const auto [exponent, predicted] = rescaling_for(config.metric, constants, mu, nu);

  std::vector<double> grid(config.points);
  for (int k = 0; k < config.points; ++k) {
    grid[k] = config.t_min *
              std::pow(config.t_max / config.t_min, static_cast<double>(k) / (config.points - 1));
  }
  grid.back() = config.t_max;

  std::vector<std::future<SweepRow>> tasks;
  tasks.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    tasks.push_back(std::async(std::launch::async, [&, k, exponent = exponent,
                                                    predicted = predicted] {
      SweepRow row;
      row.t = grid[k];
      row.rescale_exponent = exponent;
      row.predicted_limit = predicted;
      try {
        const DivergenceResult r = evaluate_metric(mu, nu, config.metric, config.method, row.t,
                                                   config.settings, config.seed ^ k);
        row.raw_value = r.value;
        row.rescaled_value = r.value * std::pow(row.t, exponent);
        row.error_estimate = r.error_estimate.value_or(kNaN);
      } catch (const InvalidInput&) {
        throw;
      } catch (const std::exception& e) {
        row.valid = false;
        row.raw_value = kNaN;
        row.rescaled_value = kNaN;
        row.error_estimate = kNaN;
        row.error = e.what();
      }
      return row;
    }));
  }

  SweepReport report;
  report.pair_id = config.pair_id;
  report.metric = config.metric;
  report.method = config.method;
  std::exception_ptr failure;
  for (auto& task : tasks) {
    try {
      report.rows.push_back(task.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const auto valid = std::count_if(report.rows.begin(), report.rows.end(),
                                   [](const SweepRow& r) { return r.valid; });
  if (valid < 3) {
    std::string first_error;
    for (const auto& r : report.rows) {
      if (!r.valid) {
        first_error = r.error;
        break;
      }
    }
    throw NumericError("sweep: fewer than 3 valid rows (" + first_error + ")");
  }
  try {
    const auto [slope, se] = fit_rate(report);
    report.fitted_exponent = slope;
    report.fit_stderr = se;
  } catch (const NumericError&) {
    // Identically zero divergences have no power law.
    report.fitted_exponent = kNaN;
    report.fit_stderr = kNaN;
  }
  return report;
}

VerifyVerdict verdict_from_report(const SweepReport& report, Theorem theorem, double rtol) {
  VerifyVerdict v;
  v.theorem = theorem;
  v.rtol = rtol;
  if (report.rows.empty()) {
    v.details = "empty report";
    v.observed = kNaN;
    v.expected = kNaN;
    return v;
  }
  std::ostringstream details;
  switch (theorem) {
    case Theorem::WpRate: {
      const auto [slope, se] = fit_rate(report);
      v.observed = slope;
      v.expected = -report.rows.front().rescale_exponent;
      v.pass = std::abs(v.observed - v.expected) <= rtol;
      details << "fitted exponent " << slope << " +/- " << se << ", expected " << v.expected
              << ", atol " << rtol;
      break;
    }
    case Theorem::GaussianSurrogate: {
      const SweepRow* first = nullptr;
      double largest = -1.0;
      for (const auto& row : report.rows) {
        if (!row.valid) continue;
        if (!first) first = &row;
        largest = std::max(largest, row.rescaled_value);
      }
      if (!first) throw NumericError("verify: no valid rows");
      v.observed = largest;
      v.expected = 2.0 * first->rescaled_value;
      v.pass = v.observed <= v.expected;
      details << "max t|W2 - W2_gauss| = " << v.observed << ", bound 2 x value at t = " << first->t
              << " = " << v.expected;
      break;
    }
    default: {
      const SweepRow& last = report.rows.back();
      v.observed = last.valid ? last.rescaled_value : kNaN;
      v.expected = last.predicted_limit;
      v.pass = last.valid && std::isfinite(v.expected) &&
               std::abs(v.observed - v.expected) <= rtol * std::abs(v.expected);
      if (!last.valid) {
        details << "last row failed: " << last.error;
      } else {
        details << "rescaled value at t = " << last.t << " is " << v.observed << ", limit "
                << v.expected << ", relative gap "
                << std::abs(v.observed - v.expected) / std::abs(v.expected);
      }
      break;
    }
  }
  v.details = details.str();
  return v;
}

VerifyVerdict verify(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Theorem theorem,
                     double rtol, std::int64_t budget, std::uint64_t seed,
                     const VerifyConfig& config, SweepReport* report_out) {
  if (mu.dim() != nu.dim()) throw InvalidInput("verify: dimension mismatch");
  const std::size_t dim = mu.dim();

  SweepConfig sc;
  sc.t_min = config.t_min;
  sc.t_max = config.t_max;
  sc.points = config.points;
  sc.seed = seed;
  sc.settings = config.settings;
  if (budget > 0) {
    sc.settings.montecarlo_samples = budget;
    sc.settings.limits.mc_samples = budget;
  }

  const MatchOrder order = matching_order(mu, nu, sc.settings.limits.degree_cap,
                                          sc.settings.limits.match_tol);
  if (order.is_all_match()) {
    return precondition_failure(theorem, rtol, "measures match through the degree cap");
  }
  const int n = order.order();
  const Method ot_method = dim == 1 ? Method::Exact1d : Method::Sinkhorn;

  switch (theorem) {
    case Theorem::W2Limit:
      if (dim > 2) return precondition_failure(theorem, rtol, "W2 needs dim 1 or 2");
      sc.metric = Metric::W2sq;
      sc.method = ot_method;
      break;
    case Theorem::Chi2Limit:
    case Theorem::KlLimit:
    case Theorem::TvLimit:
      sc.metric = theorem == Theorem::Chi2Limit ? Metric::Chi2
                  : theorem == Theorem::KlLimit ? Metric::Kl
                                                : Metric::Tv;
      sc.method = dim <= 2 ? Method::Quadrature : Method::MonteCarlo;
      break;
    case Theorem::WpRate:
      if (n < 1) return precondition_failure(theorem, rtol, "wp_rate needs matching order >= 1");
      if (dim > 2) return precondition_failure(theorem, rtol, "W2 needs dim 1 or 2");
      sc.metric = Metric::W2sq;
      sc.method = ot_method;
      break;
    case Theorem::GaussianSurrogate:
      if (dim > 2) return precondition_failure(theorem, rtol, "W2 needs dim 1 or 2");
      sc.metric = Metric::SurrogateGap;
      sc.method = ot_method;
      break;
    case Theorem::ZerothOrder:
      if (n != 0) return precondition_failure(theorem, rtol, "zeroth_order needs unequal means");
      if (dim > 2) return precondition_failure(theorem, rtol, "W_p needs dim 1 or 2");
      sc.metric = dim == 1 ? Metric::W1 : Metric::W2;
      sc.method = ot_method;
      break;
  }
  sc.pair_id = to_string(theorem);

  SweepReport report = sweep(mu, nu, sc);
  VerifyVerdict v = verdict_from_report(report, theorem, rtol);
  if (report_out) *report_out = std::move(report);
  return v;
}

std::string report_to_csv(const SweepReport& report) {
  std::string out = kReportCsvHeader;
  out += '\n';
  for (const auto& row : report.rows) {
    out += format_double(row.t) + ',' + format_double(row.raw_value) + ',' +
           format_double(row.rescale_exponent) + ',' + format_double(row.rescaled_value) + ',' +
           format_double(row.predicted_limit) + ',' + format_double(row.error_estimate) + '\n';
  }
  return out;
}

void write_report(const SweepReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << report_to_csv(report);
  if (!out) throw InvalidInput("write to " + path.string() + " failed");
}

SweepReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw ParseError("/", "report header mismatch in " + path.string());
  }
  SweepReport report;
  report.pair_id = path.stem().string();
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        throw ParseError("/" + std::to_string(line_no), "bad number '" + cell + "'");
      }
      cells.push_back(x);
    }
    if (cells.size() != 6) {
      throw ParseError("/" + std::to_string(line_no), "expected 6 columns");
    }
    SweepRow row;
    row.t = cells[0];
    row.raw_value = cells[1];
    row.rescale_exponent = cells[2];
    row.rescaled_value = cells[3];
    row.predicted_limit = cells[4];
    row.error_estimate = cells[5];
    row.valid = std::isfinite(row.raw_value);
    report.rows.push_back(row);
  }
  try {
    const auto [slope, se] = fit_rate(report);
    report.fitted_exponent = slope;
    report.fit_stderr = se;
  } catch (const NumericError&) {
    report.fitted_exponent = kNaN;
    report.fit_stderr = kNaN;
  }
  return report;
}

void write_plot_data(const SweepReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
  out << "# t rescaled_value\n";
  for (const auto& row : report.rows) {
    if (row.valid) out << format_double(row.t) << ' ' << format_double(row.rescaled_value) << '\n';
  }
}

nlohmann::json report_to_json(const SweepReport& report) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j = {{"t", r.t},
                        {"raw_value", num(r.raw_value)},
                        {"rescale_exponent", r.rescale_exponent},
                        {"rescaled_value", num(r.rescaled_value)},
                        {"predicted_limit", num(r.predicted_limit)},
                        {"error_estimate", num(r.error_estimate)}};
    if (!r.valid) j["error"] = r.error;
    rows.push_back(std::move(j));
  }
  return {{"pair_id", report.pair_id},
          {"metric", to_string(report.metric)},
          {"method", to_string(report.method)},
          {"rows", rows},
          {"fitted_exponent", num(report.fitted_exponent)},
          {"fit_stderr", num(report.fit_stderr)}};
}

nlohmann::json verdict_to_json(const VerifyVerdict& v) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  nlohmann::json j = {{"theorem", to_string(v.theorem)},
                      {"pass", v.pass},
                      {"observed", num(v.observed)},
                      {"expected", num(v.expected)},
                      {"rtol", v.rtol},
                      {"details", v.details}};
  if (v.precondition_failed) j["precondition"] = true;
  return j;
}

}  // namespace smoothot
