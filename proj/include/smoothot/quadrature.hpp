#pragma once

#include <functional>

namespace smoothot {

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int subdivisions = 0;
  bool converged = false;
};

struct AdaptiveOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
  // The interval is pre-split into this many equal panels before refinement,
  // so that narrow features are seen by the first pass.
  int initial_panels = 32;
};

/// Globally adaptive 7/15-point Gauss-Kronrod integration on [a, b]: the panel
/// with the largest error estimate is bisected until
/// error <= max(abs_tol, rel_tol * |value|) or the subdivision budget runs out.
IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     const AdaptiveOptions& opts = {});

/// Non-adaptive composite rule: `panels` equal panels, 15 Kronrod nodes each.
double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels);

}  // namespace smoothot
