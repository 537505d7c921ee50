#include "smoothot/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "smoothot/errors.hpp"

namespace smoothot {

double hermite(int m, double x) {
  if (m < 0) throw InvalidInput("hermite: negative degree");
  if (m == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < m; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_table(int max_degree, double x) {
  std::vector<double> h(static_cast<std::size_t>(max_degree) + 1);
  h[0] = 1.0;
  if (max_degree >= 1) h[1] = x;
  for (int k = 1; k < max_degree; ++k) h[k + 1] = x * h[k] - k * h[k - 1];
  return h;
}

double hermite_eval(const MultiIndex& alpha, std::span<const double> x) {
  if (alpha.dim() != x.size()) throw InvalidInput("hermite_eval: dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) v *= hermite(alpha[i], x[i]);
  return v;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite

namespace {

// Normalised recurrence h_k = He_k / sqrt(k!): returns (h_{m-1}(x), h_m(x)).
std::pair<double, double> normalized_hermite(int m, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (int k = 0; k < m; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return {prev, cur};
}

}  // namespace

QuadratureRule gauss_hermite_rule(int order) {
  if (order < 1) throw InvalidInput("gauss_hermite_rule: order must be >= 1");
  QuadratureRule rule;
  rule.order = order;
  if (order == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order - 1);
  for (int k = 1; k < order; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("gauss_hermite_rule: tridiagonal eigen-solve did not converge");
  }

  const double m = order;
  for (int i = 0; i < order; ++i) {
    double x = solver.eigenvalues()[i];
    // He_m' = m He_{m-1}, i.e. h_m' = sqrt(m) h_{m-1} in normalised form.
    for (int it = 0; it < 3; ++it) {
      const auto [hm1, hm] = normalized_hermite(order, x);
      x -= hm / (std::sqrt(m) * hm1);
    }
    const auto [hm1, hm] = normalized_hermite(order, x);
    (void)hm;
    rule.nodes.push_back(x);
    rule.weights.push_back(1.0 / (m * hm1 * hm1));
  }

  // Enforce exact symmetry about 0 and unit mass.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (auto& w : rule.weights) w /= total;
  return rule;
}

// ---------------------------------------------------------------------------
// ChaosExpansion

ChaosExpansion::ChaosExpansion(std::size_t dim, int max_degree)
    : dim_(dim), max_degree_(max_degree) {
  if (dim == 0) throw InvalidInput("ChaosExpansion: dim must be >= 1");
  if (max_degree < 0) throw InvalidInput("ChaosExpansion: max_degree must be >= 0");
}

double ChaosExpansion::coeff(const MultiIndex& alpha) const {
  auto it = coeffs_.find(alpha);
  return it == coeffs_.end() ? 0.0 : it->second;
}

double ChaosExpansion::scaled(const MultiIndex& alpha, double base) const {
  const double eigenvalue = -static_cast<double>(alpha.degree());
  double c = base;
  for (int k = 0; k < ou_power_; ++k) c *= eigenvalue;
  for (int k = 0; k > ou_power_; --k) c /= eigenvalue;
  return c;
}

void ChaosExpansion::set(const MultiIndex& alpha, double c) {
  if (alpha.dim() != dim_) throw InvalidInput("ChaosExpansion: index dimension mismatch");
  if (alpha.degree() > max_degree_) throw InvalidInput("ChaosExpansion: index above max_degree");
  if (c == 0.0) {
    coeffs_.erase(alpha);
    base_.erase(alpha);
    return;
  }
  if (ou_power_ != 0 && alpha.degree() == 0) {
    throw InvalidInput("ChaosExpansion: degree-0 coefficient of an OU image must vanish");
  }
  double base = c;
  const double eigenvalue = -static_cast<double>(alpha.degree());
  for (int k = 0; k < ou_power_; ++k) base /= eigenvalue;
  for (int k = 0; k > ou_power_; --k) base *= eigenvalue;
  base_[alpha] = base;
  coeffs_[alpha] = c;
}

ChaosExpansion ChaosExpansion::with_ou_power(int k) const {
  ChaosExpansion out(dim_, max_degree_);
  out.ou_power_ = k;
  for (const auto& [alpha, base] : base_) {
    if (k != 0 && alpha.degree() == 0) continue;
    out.base_[alpha] = base;
    const double c = out.scaled(alpha, base);
    if (c != 0.0) out.coeffs_[alpha] = c;
  }
  return out;
}

ChaosExpansion ChaosExpansion::slice(int degree) const {
  ChaosExpansion out(dim_, max_degree_);
  out.ou_power_ = ou_power_;
  for (const auto& [alpha, base] : base_) {
    if (alpha.degree() != degree) continue;
    out.base_[alpha] = base;
    if (auto it = coeffs_.find(alpha); it != coeffs_.end()) out.coeffs_[alpha] = it->second;
  }
  return out;
}

double ChaosExpansion::evaluate(std::span<const double> x) const {
  if (x.size() != dim_) throw InvalidInput("ChaosExpansion::evaluate: dimension mismatch");
  std::vector<std::vector<double>> tables;
  for (double xi : x) tables.push_back(hermite_table(max_degree_, xi));
  double s = 0.0;
  for (const auto& [alpha, c] : coeffs_) {
    double h = 1.0;
    for (std::size_t i = 0; i < dim_; ++i) h *= tables[i][alpha[i]];
    s += c * h;
  }
  return s;
}

double ChaosExpansion::l2_norm_squared() const {
  double s = 0.0;
  for (const auto& [alpha, c] : coeffs_) s += alpha.factorial() * c * c;
  return s;
}

ChaosExpansion chaos_coefficients(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                                  int max_degree) {
  if (!(t > 0.0)) throw InvalidInput("chaos_coefficients: t must be positive");
  if (max_degree < 1) throw InvalidInput("chaos_coefficients: max_degree must be >= 1");
  if (mu.dim() != nu.dim()) throw InvalidInput("chaos_coefficients: dimension mismatch");
  ChaosExpansion out(mu.dim(), max_degree);
  for (const auto& [alpha, delta] : moment_differences(mu, nu, max_degree)) {
    if (alpha.degree() == 0 || delta == 0.0) continue;
    const double scale = std::pow(t, 0.5 * (1.0 - alpha.degree()));
    out.set(alpha, scale * delta / alpha.factorial());
  }
  return out;
}

ChaosExpansion project_numeric(const std::function<double(std::span<const double>)>& f,
                               std::size_t dim, int max_degree, int nodes_per_axis) {
  if (dim == 0) throw InvalidInput("project_numeric: dim must be >= 1");
  if (nodes_per_axis < 1) throw InvalidInput("project_numeric: need at least one node");
  const double total_nodes = std::pow(static_cast<double>(nodes_per_axis), dim);
  if (total_nodes > static_cast<double>(kTensorQuadratureBudget)) {
    throw ResourceError("project_numeric: tensor grid of " + std::to_string(total_nodes) +
                        " nodes exceeds budget of " + std::to_string(kTensorQuadratureBudget));
  }
  const auto rule = gauss_hermite_rule(nodes_per_axis);
  std::vector<std::vector<double>> tables;
  for (double x : rule.nodes) tables.push_back(hermite_table(max_degree, x));

  const auto indices = multi_indices_up_to(dim, max_degree);
  std::vector<double> acc(indices.size(), 0.0);
  std::vector<int> pos(dim, 0);
  Point x(dim);
  const auto count = static_cast<long long>(total_nodes);
  for (long long flat = 0; flat < count; ++flat) {
    double w = 1.0;
    for (std::size_t i = 0; i < dim; ++i) {
      x[i] = rule.nodes[pos[i]];
      w *= rule.weights[pos[i]];
    }
    const double fx = f(x);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      double h = 1.0;
      for (std::size_t i = 0; i < dim; ++i) h *= tables[pos[i]][indices[k][i]];
      acc[k] += w * fx * h;
    }
    for (std::size_t i = 0; i < dim; ++i) {
      if (++pos[i] < nodes_per_axis) break;
      pos[i] = 0;
    }
  }
  ChaosExpansion out(dim, max_degree);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.set(indices[k], acc[k] / indices[k].factorial());
  }
  return out;
}

ChaosExpansion ou_apply(const ChaosExpansion& w) { return w.with_ou_power(w.ou_power() + 1); }

namespace {

void require_zero_mean(const ChaosExpansion& theta) {
  const MultiIndex zero(std::vector<int>(theta.dim(), 0));
  if (std::abs(theta.coeff(zero)) > 1e-10) {
    throw InvalidInput("Ornstein-Uhlenbeck inverse needs a zero-mean right-hand side");
  }
}

}  // namespace

ChaosExpansion ou_inverse(const ChaosExpansion& theta) {
  require_zero_mean(theta);
  return theta.with_ou_power(theta.ou_power() - 1);
}

double dirichlet_energy(const ChaosExpansion& theta) {
  require_zero_mean(theta);
  double s = 0.0;
  for (const auto& [alpha, c] : theta.coeffs()) {
    if (alpha.degree() == 0) continue;
    s += alpha.factorial() / alpha.degree() * c * c;
  }
  return s;
}

double theta_l2(const ChaosExpansion& theta) { return theta.l2_norm_squared(); }

nlohmann::json chaos_to_json(const ChaosExpansion& c) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [alpha, v] : c.coeffs()) {
    coeffs.push_back({{"alpha", alpha.entries()}, {"c", v}});
  }
  return {{"dim", c.dim()}, {"max_degree", c.max_degree()}, {"coeffs", coeffs}};
}

ChaosExpansion chaos_from_json(const nlohmann::json& j) {
  try {
    ChaosExpansion out(j.at("dim").get<std::size_t>(), j.at("max_degree").get<int>());
    for (const auto& entry : j.at("coeffs")) {
      out.set(MultiIndex(entry.at("alpha").get<std::vector<int>>()), entry.at("c").get<double>());
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("", std::string("malformed chaos expansion: ") + e.what());
  }
}

}  // namespace smoothot
