#include "smoothot/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "smoothot/errors.hpp"

namespace smoothot {

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw InvalidInput("multi-index must have dimension >= 1");
  for (int a : entries_) {
    if (a < 0) throw InvalidInput("multi-index entries must be nonnegative");
    degree_ += a;
  }
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int a : entries_) {
    for (int k = 2; k <= a; ++k) f *= k;
  }
  return f;
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = dim() <=> other.dim(); c != 0) return c;
  if (auto c = degree_ <=> other.degree_; c != 0) return c;
  // Descending lexicographic within a degree block.
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i] != other.entries_[i]) {
      return other.entries_[i] <=> entries_[i];
    }
  }
  return std::strong_ordering::equal;
}

namespace {

void fill_degree(std::size_t pos, int remaining, std::vector<int>& cur,
                 std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.emplace_back(cur);
    return;
  }
  for (int a = remaining; a >= 0; --a) {
    cur[pos] = a;
    fill_degree(pos + 1, remaining - a, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_degree(std::size_t dim, int degree) {
  if (dim == 0) throw InvalidInput("dimension must be >= 1");
  if (degree < 0) throw InvalidInput("degree must be >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> cur(dim, 0);
  fill_degree(0, degree, cur, out);
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(std::size_t dim, int max_degree) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= max_degree; ++k) {
    auto block = multi_indices_of_degree(dim, k);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

double monomial(const MultiIndex& alpha, std::span<const double> x) {
  if (alpha.dim() != x.size()) throw InvalidInput("multi-index / point dimension mismatch");
  double v = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < alpha[i]; ++k) v *= x[i];
  }
  return v;
}

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<Atom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  if (dim_ == 0) throw InvalidInput("measure dimension must be >= 1");
  if (atoms_.empty()) throw InvalidInput("measure needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms_) {
    if (a.x.size() != dim_) throw InvalidInput("atom location has wrong dimension");
    for (double c : a.x) {
      if (!std::isfinite(c)) throw InvalidInput("atom location is not finite");
    }
    if (!(a.w > 0.0) || !std::isfinite(a.w)) throw InvalidInput("atom weights must be positive");
    total += a.w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidInput("atom weights sum to " + std::to_string(total) + ", expected 1");
  }
  std::stable_sort(atoms_.begin(), atoms_.end(),
                   [](const Atom& a, const Atom& b) { return a.x < b.x; });
}

DiscreteMeasure DiscreteMeasure::dirac(Point x) {
  const std::size_t d = x.size();
  return DiscreteMeasure(d, {Atom{std::move(x), 1.0}});
}

Point DiscreteMeasure::mean() const {
  Point m(dim_, 0.0);
  for (const auto& a : atoms_) {
    for (std::size_t i = 0; i < dim_; ++i) m[i] += a.w * a.x[i];
  }
  return m;
}

double DiscreteMeasure::second_moment() const {
  return second_moment_about(Point(dim_, 0.0));
}

double DiscreteMeasure::second_moment_about(std::span<const double> v) const {
  if (v.size() != dim_) throw InvalidInput("dimension mismatch");
  double s = 0.0;
  for (const auto& a : atoms_) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) r2 += (a.x[i] - v[i]) * (a.x[i] - v[i]);
    s += a.w * r2;
  }
  return s;
}

Eigen::MatrixXd DiscreteMeasure::covariance() const {
  const Point m = mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim_, dim_);
  for (const auto& a : atoms_) {
    Eigen::VectorXd c(dim_);
    for (std::size_t i = 0; i < dim_; ++i) c[i] = a.x[i] - m[i];
    cov += a.w * c * c.transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

double DiscreteMeasure::radius_about(std::span<const double> v) const {
  double r = 0.0;
  for (const auto& a : atoms_) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) r2 += (a.x[i] - v[i]) * (a.x[i] - v[i]);
    r = std::max(r, std::sqrt(r2));
  }
  return r;
}

bool DiscreteMeasure::operator==(const DiscreteMeasure& other) const {
  if (dim_ != other.dim_ || atoms_.size() != other.atoms_.size()) return false;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].x != other.atoms_[i].x || atoms_[i].w != other.atoms_[i].w) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Moments

MomentTable::MomentTable(std::size_t dim, int max_degree, std::map<MultiIndex, double> values)
    : dim_(dim), max_degree_(max_degree), values_(std::move(values)) {}

double MomentTable::at(const MultiIndex& alpha) const {
  auto it = values_.find(alpha);
  if (it == values_.end()) throw InvalidInput("multi-index outside moment table");
  return it->second;
}

double moment(const DiscreteMeasure& m, const MultiIndex& alpha) {
  if (alpha.dim() != m.dim()) throw InvalidInput("moment: dimension mismatch");
  if (alpha.degree() == 0) return 1.0;
  double s = 0.0;
  for (const auto& a : m.atoms()) s += a.w * monomial(alpha, a.x);
  return s;
}

MomentTable moment_table(const DiscreteMeasure& m, int max_degree) {
  if (max_degree < 0) throw InvalidInput("moment_table: degree must be >= 0");
  std::map<MultiIndex, double> values;
  for (const auto& alpha : multi_indices_up_to(m.dim(), max_degree)) {
    values.emplace(alpha, moment(m, alpha));
  }
  return MomentTable(m.dim(), max_degree, std::move(values));
}

int MatchOrder::order() const {
  if (is_all_match()) {
    throw IndistinguishableMeasures("measures indistinguishable to cap: all moments match");
  }
  return n_;
}

MatchOrder matching_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int max_degree,
                          double tol) {
  if (mu.dim() != nu.dim()) throw InvalidInput("matching_order: dimension mismatch");
  if (!(tol > 0.0)) throw InvalidInput("matching_order: tol must be positive");
  if (max_degree < 0) throw InvalidInput("matching_order: degree must be >= 0");
  for (int k = 1; k <= max_degree; ++k) {
    for (const auto& alpha : multi_indices_of_degree(mu.dim(), k)) {
      const double a = moment(mu, alpha);
      const double b = moment(nu, alpha);
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (std::abs(a - b) > tol * scale) return MatchOrder::finite(k - 1);
    }
  }
  return MatchOrder::all_match();
}

std::map<MultiIndex, double> moment_differences(const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu, int max_degree) {
  if (mu.dim() != nu.dim()) throw InvalidInput("moment_differences: dimension mismatch");
  std::map<MultiIndex, double> diff;
  for (const auto& alpha : multi_indices_up_to(mu.dim(), max_degree)) {
    diff.emplace(alpha, moment(mu, alpha) - moment(nu, alpha));
  }
  return diff;
}

DiscreteMeasure translate(const DiscreteMeasure& m, std::span<const double> v) {
  if (v.size() != m.dim()) throw InvalidInput("translate: dimension mismatch");
  std::vector<Atom> atoms = m.atoms();
  for (auto& a : atoms) {
    for (std::size_t i = 0; i < v.size(); ++i) a.x[i] += v[i];
  }
  return DiscreteMeasure(m.dim(), std::move(atoms));
}

// ---------------------------------------------------------------------------
// Matched-pair generator

namespace {

constexpr int kMaxGenerationAttempts = 2000;
constexpr double kNodeHalfWidth = 1.5;
constexpr double kMinSeparation = 1e-3;
constexpr double kRequiredGap = 0.1;

std::vector<Point> random_nodes(std::size_t count, std::size_t dim, std::mt19937_64& rng,
                                const std::vector<Point>& avoid) {
  std::uniform_real_distribution<double> unif(-kNodeHalfWidth, kNodeHalfWidth);
  std::vector<Point> nodes;
  auto far_from = [&](const Point& p, const std::vector<Point>& set) {
    for (const auto& q : set) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) r2 += (p[i] - q[i]) * (p[i] - q[i]);
      if (std::sqrt(r2) < kMinSeparation) return false;
    }
    return true;
  };
  while (nodes.size() < count) {
    Point p(dim);
    for (auto& c : p) c = unif(rng);
    if (far_from(p, nodes) && far_from(p, avoid)) nodes.push_back(std::move(p));
  }
  return nodes;
}

}  // namespace

std::pair<DiscreteMeasure, DiscreteMeasure> gen_matched_pair(int n, std::size_t dim,
                                                             std::uint64_t seed) {
  if (n < 0) throw InvalidInput("gen_matched_pair: n must be >= 0");
  if (dim == 0) throw InvalidInput("gen_matched_pair: dim must be >= 1");

  const auto constraints = multi_indices_up_to(dim, n);
  const auto next_degree = multi_indices_of_degree(dim, n + 1);
  const std::size_t m = constraints.size();
  // One more node than constraints leaves a one-dimensional null space.
  const std::size_t count = std::max<std::size_t>(static_cast<std::size_t>(n) + 2, m + 1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight_draw(0.2, 1.0);

  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    const auto mu_nodes = random_nodes(count, dim, rng, {});
    const auto nu_nodes = random_nodes(count, dim, rng, mu_nodes);

    std::vector<Atom> mu_atoms;
    double total = 0.0;
    for (const auto& x : mu_nodes) {
      mu_atoms.push_back({x, weight_draw(rng)});
      total += mu_atoms.back().w;
    }
    for (auto& a : mu_atoms) a.w /= total;
    const double mu_total =
        std::accumulate(mu_atoms.begin(), mu_atoms.end(), 0.0,
                        [](double s, const Atom& a) { return s + a.w; });
    mu_atoms.front().w += 1.0 - mu_total;
    const DiscreteMeasure mu(dim, mu_atoms);

    Eigen::MatrixXd V(m, count);
    Eigen::VectorXd rhs(m);
    for (std::size_t r = 0; r < m; ++r) {
      rhs[r] = moment(mu, constraints[r]);
      for (std::size_t j = 0; j < count; ++j) V(r, j) = monomial(constraints[r], nu_nodes[j]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.rank() < static_cast<Eigen::Index>(m)) continue;
    const Eigen::VectorXd base = svd.solve(rhs);
    const Eigen::VectorXd null_dir = svd.matrixV().col(count - 1);

    // Feasible interval for base + s * null_dir > 0.
    double s_lo = -std::numeric_limits<double>::infinity();
    double s_hi = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      if (null_dir[j] > 0) {
        s_lo = std::max(s_lo, -base[j] / null_dir[j]);
      } else if (null_dir[j] < 0) {
        s_hi = std::min(s_hi, -base[j] / null_dir[j]);
      } else if (base[j] <= 0) {
        s_lo = 1.0;
        s_hi = 0.0;
      }
    }
    if (!(s_lo < s_hi) || !std::isfinite(s_lo) || !std::isfinite(s_hi)) continue;

    auto gap_at = [&](double s) {
      double gap = 0.0;
      for (const auto& alpha : next_degree) {
        double nu_moment = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
          nu_moment += (base[j] + s * null_dir[j]) * monomial(alpha, nu_nodes[j]);
        }
        gap = std::max(gap, std::abs(nu_moment - moment(mu, alpha)));
      }
      return gap;
    };
    const double margin = 0.05 * (s_hi - s_lo);
    const double s_a = s_lo + margin;
    const double s_b = s_hi - margin;
    const double s = gap_at(s_a) >= gap_at(s_b) ? s_a : s_b;
    if (gap_at(s) < kRequiredGap) continue;

    std::vector<Atom> nu_atoms;
    double nu_total = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double w = base[j] + s * null_dir[j];
      if (!(w > 0.0)) break;
      nu_atoms.push_back({nu_nodes[j], w});
      nu_total += w;
    }
    if (nu_atoms.size() != count || std::abs(nu_total - 1.0) > 1e-12) continue;
    nu_atoms.front().w += 1.0 - nu_total;
    if (!(nu_atoms.front().w > 0.0)) continue;
    DiscreteMeasure nu(dim, nu_atoms);

    const auto order = matching_order(mu, nu, n + 2, 1e-9);
    if (!order.is_all_match() && order.order() == n) {
      return {mu, std::move(nu)};
    }
  }
  throw GenerationFailure("gen_matched_pair: no admissible pair after " +
                          std::to_string(kMaxGenerationAttempts) + " attempts");
}

}  // namespace smoothot
