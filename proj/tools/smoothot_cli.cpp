#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "smoothot/divergences.hpp"
#include "smoothot/errors.hpp"
#include "smoothot/harness.hpp"
#include "smoothot/hermite.hpp"
#include "smoothot/limits.hpp"
#include "smoothot/measure_io.hpp"
#include "smoothot/measures.hpp"

using namespace smoothot;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  bool renormalize = false;
};

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw InvalidInput("cannot open " + g.out + " for writing");
  f << text;
}

void emit(const Globals& g, const json& j) { emit(g, j.dump(2) + "\n"); }

struct PairArgs {
  std::string mu;
  std::string nu;
};

void add_pair(CLI::App* cmd, PairArgs& p) {
  cmd->add_option("mu", p.mu, "First measure (JSON file)")->required()->check(CLI::ExistingFile);
  cmd->add_option("nu", p.nu, "Second measure (JSON file)")->required()->check(CLI::ExistingFile);
}

std::pair<DiscreteMeasure, DiscreteMeasure> load_pair(const PairArgs& p, const Globals& g) {
  const ParseOptions opts{g.renormalize};
  return {read_measure(p.mu, opts), read_measure(p.nu, opts)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotics of smoothed Wasserstein distances and f-divergences"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed for Monte Carlo and pair generation")
      ->capture_default_str();
  app.add_option("--out", g.out, "Write the result here instead of stdout (directory for gen-pair)");
  app.add_flag("--renormalize", g.renormalize,
               "Rescale input weights that do not sum to 1 instead of rejecting them");

  // moments
  auto* moments_cmd = app.add_subcommand("moments", "Moments E X^a for |a| <= degree");
  std::string moments_file;
  int moments_degree = 4;
  moments_cmd->add_option("measure", moments_file, "Measure (JSON file)")
      ->required()
      ->check(CLI::ExistingFile);
  moments_cmd->add_option("--degree", moments_degree, "Largest total degree")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  // match-order
  auto* match_cmd = app.add_subcommand("match-order", "Moment matching order of a pair");
  PairArgs match_pair;
  int match_cap = 12;
  double match_tol = 1e-9;
  add_pair(match_cmd, match_pair);
  match_cmd->add_option("--cap", match_cap, "Largest degree compared")->capture_default_str();
  match_cmd->add_option("--tol", match_tol, "Relative moment tolerance")->capture_default_str();

  // limits
  auto* limits_cmd = app.add_subcommand("limits", "Limiting constants as t -> infinity");
  PairArgs limits_pair;
  LimitOptions limit_opts;
  add_pair(limits_cmd, limits_pair);
  limits_cmd->add_option("--cap", limit_opts.degree_cap, "Largest degree compared")
      ->capture_default_str();
  limits_cmd->add_option("--mc-samples", limit_opts.mc_samples,
                         "Normal draws for the total-variation constant")
      ->capture_default_str();

  // distance
  auto* distance_cmd = app.add_subcommand("distance", "One divergence at a fixed t");
  PairArgs distance_pair;
  double distance_t = 0.0;
  std::string distance_method = "exact1d";
  std::string distance_metric = "w2";
  double distance_p = 2.0;
  std::optional<int> distance_grid;
  std::optional<double> distance_eps;
  std::int64_t distance_budget = 20000;
  int distance_degree = 6;
  add_pair(distance_cmd, distance_pair);
  distance_cmd->add_option("--t", distance_t, "Gaussian variance t > 0")->required();
  distance_cmd->add_option("--method", distance_method,
                           "exact1d | sinkhorn | quadrature | montecarlo | chaos_bound | dual_bound")
      ->capture_default_str();
  distance_cmd->add_option("--metric", distance_metric,
                           "wp | w1 | w2 | w2sq | chi2 | kl | tv | surrogate_gap")
      ->capture_default_str();
  distance_cmd->add_option("--p", distance_p, "Order of W_p for --metric wp")->capture_default_str();
  distance_cmd->add_option("--grid", distance_grid,
                           "exact1d: quantile intervals (400); sinkhorn: cells per axis (64); "
                           "dual_bound: lattice points per axis (401)");
  distance_cmd->add_option("--eps", distance_eps, "Sinkhorn regularisation (default t / 4)");
  distance_cmd->add_option("--budget", distance_budget,
                           "Quadrature subdivisions or Monte Carlo draws")
      ->capture_default_str();
  distance_cmd->add_option("--degree", distance_degree, "Chaos truncation degree for chaos_bound")
      ->capture_default_str();

  // moser-bound
  auto* moser_cmd = app.add_subcommand("moser-bound", "Chaos upper bound on W_2^2");
  PairArgs moser_pair;
  double moser_t = 0.0;
  int moser_degree = 6;
  std::string moser_dump;
  add_pair(moser_cmd, moser_pair);
  moser_cmd->add_option("--t", moser_t, "Gaussian variance t > 0")->required();
  moser_cmd->add_option("--degree", moser_degree, "Chaos truncation degree K")->capture_default_str();
  moser_cmd->add_option("--dump", moser_dump, "Write the chaos coefficients as JSON");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Rescaled divergences over a geometric t-grid (CSV)");
  PairArgs sweep_pair;
  SweepConfig sweep_cfg;
  std::string sweep_metric = "w2sq";
  std::string sweep_method = "exact1d";
  std::string sweep_plot;
  add_pair(sweep_cmd, sweep_pair);
  sweep_cmd->add_option("--metric", sweep_metric, "w1 | w2 | w2sq | chi2 | kl | tv | surrogate_gap")
      ->capture_default_str();
  sweep_cmd->add_option("--method", sweep_method, "Solver, as for distance")->capture_default_str();
  sweep_cmd->add_option("--t-min", sweep_cfg.t_min, "Smallest t")->capture_default_str();
  sweep_cmd->add_option("--t-max", sweep_cfg.t_max, "Largest t")->capture_default_str();
  sweep_cmd->add_option("--points", sweep_cfg.points, "Grid points")->capture_default_str();
  sweep_cmd->add_option("--pair-id", sweep_cfg.pair_id, "Label stored in the report")
      ->capture_default_str();
  sweep_cmd->add_option("--plot", sweep_plot, "Also write a two-column gnuplot file");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Check a limit theorem on a pair");
  PairArgs verify_pair;
  std::string verify_theorem;
  double verify_rtol = 0.05;
  std::int64_t verify_budget = 1'000'000;
  VerifyConfig verify_cfg;
  std::string verify_report;
  add_pair(verify_cmd, verify_pair);
  verify_cmd->add_option("--theorem", verify_theorem,
                         "w2_limit | chi2_limit | kl_limit | tv_limit | wp_rate | "
                         "gaussian_surrogate | zeroth_order")
      ->required();
  verify_cmd->add_option("--rtol", verify_rtol,
                         "Relative tolerance (absolute on the exponent for wp_rate)")
      ->capture_default_str();
  verify_cmd->add_option("--budget", verify_budget, "Monte Carlo draws")->capture_default_str();
  verify_cmd->add_option("--t-min", verify_cfg.t_min, "Smallest t")->capture_default_str();
  verify_cmd->add_option("--t-max", verify_cfg.t_max, "Largest t")->capture_default_str();
  verify_cmd->add_option("--points", verify_cfg.points, "Grid points")->capture_default_str();
  verify_cmd->add_option("--report", verify_report, "Write the underlying sweep as CSV");

  // gen-pair
  auto* gen_cmd = app.add_subcommand("gen-pair", "Random pair with a prescribed matching order");
  int gen_n = 1;
  std::size_t gen_dim = 1;
  gen_cmd->add_option("--n", gen_n, "Matching order")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  gen_cmd->add_option("--dim", gen_dim, "Dimension")->capture_default_str()->check(
      CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*moments_cmd) {
      const DiscreteMeasure m = read_measure(moments_file, ParseOptions{g.renormalize});
      json rows = json::array();
      for (const auto& alpha : multi_indices_up_to(m.dim(), moments_degree)) {
        rows.push_back({{"alpha", alpha.entries()}, {"moment", moment(m, alpha)}});
      }
      emit(g, json{{"dim", m.dim()}, {"moments", rows}});
    } else if (*match_cmd) {
      const auto [mu, nu] = load_pair(match_pair, g);
      const MatchOrder order = matching_order(mu, nu, match_cap, match_tol);
      emit(g, json{{"n", order.is_all_match() ? json("all_match") : json(order.order())}});
    } else if (*limits_cmd) {
      const auto [mu, nu] = load_pair(limits_pair, g);
      limit_opts.seed = g.seed;
      emit(g, limits_to_json(limit_constants(mu, nu, limit_opts)));
    } else if (*distance_cmd) {
      const auto [mu, nu] = load_pair(distance_pair, g);
      const Method method = method_from_string(distance_method);
      DivergenceResult r;
      if (distance_metric == "wp") {
        if (method != Method::Exact1d) throw InvalidInput("metric wp needs method exact1d");
        r = wp_1d(mu, nu, distance_t, distance_p, distance_grid.value_or(400));
      } else {
        SolverSettings s;
        if (distance_grid) {
          s.wp_grid = *distance_grid;
          s.sinkhorn_grid = *distance_grid;
          s.dual_grid = *distance_grid;
        }
        if (distance_eps) s.sinkhorn_eps_ratio = *distance_eps / distance_t;
        s.quadrature_budget = distance_budget;
        s.montecarlo_samples = distance_budget;
        s.moser_degree = distance_degree;
        r = evaluate_metric(mu, nu, metric_from_string(distance_metric), method, distance_t, s,
                            g.seed);
      }
      emit(g, result_to_json(r));
    } else if (*moser_cmd) {
      const auto [mu, nu] = load_pair(moser_pair, g);
      const DivergenceResult r = moser_w2_upper_bound(mu, nu, moser_t, moser_degree);
      if (!moser_dump.empty()) {
        const Point m = mu.mean();
        Point shift(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) shift[i] = -m[i];
        const ChaosExpansion c =
            chaos_coefficients(translate(mu, shift), translate(nu, shift), moser_t, moser_degree);
        std::ofstream f(moser_dump, std::ios::binary);
        if (!f) throw InvalidInput("cannot open " + moser_dump + " for writing");
        f << chaos_to_json(c).dump(2) << "\n";
      }
      emit(g, result_to_json(r));
    } else if (*sweep_cmd) {
      const auto [mu, nu] = load_pair(sweep_pair, g);
      sweep_cfg.metric = metric_from_string(sweep_metric);
      sweep_cfg.method = method_from_string(sweep_method);
      sweep_cfg.seed = g.seed;
      const SweepReport report = sweep(mu, nu, sweep_cfg);
      if (!sweep_plot.empty()) write_plot_data(report, sweep_plot);
      emit(g, report_to_csv(report));
      std::cerr << "fitted exponent " << report.fitted_exponent << " +/- " << report.fit_stderr
                << "\n";
    } else if (*verify_cmd) {
      const auto [mu, nu] = load_pair(verify_pair, g);
      SweepReport report;
      const VerifyVerdict v = verify(mu, nu, theorem_from_string(verify_theorem), verify_rtol,
                                     verify_budget, g.seed, verify_cfg, &report);
      if (!verify_report.empty() && !v.precondition_failed) write_report(report, verify_report);
      emit(g, verdict_to_json(v));
      if (v.precondition_failed) return kExitInput;
      return v.pass ? 0 : kExitFail;
    } else if (*gen_cmd) {
      const auto [mu, nu] = gen_matched_pair(gen_n, gen_dim, g.seed);
      if (g.out.empty()) {
        std::cout << json{{"mu", measure_to_json(mu)}, {"nu", measure_to_json(nu)}}.dump(2) << "\n";
      } else {
        std::filesystem::create_directories(g.out);
        write_measure(mu, std::filesystem::path(g.out) / "mu.json");
        write_measure(nu, std::filesystem::path(g.out) / "nu.json");
      }
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return 0;
}
