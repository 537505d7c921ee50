#include "smoothot/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "smoothot/errors.hpp"

namespace smoothot {

namespace {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// One Kronrod-15 panel; the error is |K15 - G7|.
Panel kronrod15(const std::function<double(double)>& f, double a, double b) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error);
  return Panel{a, b, value, error};
}

}  // namespace

IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                     const AdaptiveOptions& opts) {
  if (!(b > a)) throw InvalidInput("integrate_adaptive: need a < b");
  const int panels = std::max(1, opts.initial_panels);
  std::priority_queue<Panel> queue;
  IntegrationResult out;
  double total = 0.0;
  double total_err = 0.0;
  const double width = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == panels) ? b : a + (k + 1) * width;
    Panel p = kronrod15(f, lo, hi);
    out.evaluations += 15;
    total += p.value;
    total_err += p.error;
    queue.push(p);
  }

  while (true) {
    const double target = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    if (total_err <= target) {
      out.converged = true;
      break;
    }
    if (out.subdivisions >= opts.max_subdivisions) break;
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel at machine resolution; keep it and stop refining.
      queue.push(worst);
      break;
    }
    Panel left = kronrod15(f, worst.a, mid);
    Panel right = kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    ++out.subdivisions;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }

  // Re-sum from the panels to shed accumulated update rounding.
  total = 0.0;
  total_err = 0.0;
  std::vector<Panel> all;
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : all) {
    total += p.value;
    total_err += p.error;
  }
  out.value = total;
  out.error = total_err;
  return out;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b, int panels) {
  if (!(b > a) || panels < 1) throw InvalidInput("integrate_panels: bad interval or panel count");
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    total += kronrod15(f, a + k * width, a + (k + 1) * width).value;
  }
  return total;
}

}  // namespace smoothot
