#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace smoothot {

using Point = std::vector<double>;

/// Multi-index alpha in N^d. Ordering is graded lexicographic: lower total
/// degree first, then lexicographically descending entries, so that in d = 2
/// the degree-2 block reads (2,0), (1,1), (0,2).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  std::size_t dim() const { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }

  int degree() const { return degree_; }
  /// alpha! = prod alpha_i!
  double factorial() const;

  bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
  std::strong_ordering operator<=>(const MultiIndex& other) const;

 private:
  std::vector<int> entries_;
  int degree_ = 0;
};

/// All multi-indices in dimension `dim` with |alpha| == degree, graded-lex order.
std::vector<MultiIndex> multi_indices_of_degree(std::size_t dim, int degree);
/// All multi-indices with |alpha| <= max_degree; C(max_degree + dim, dim) entries.
std::vector<MultiIndex> multi_indices_up_to(std::size_t dim, int max_degree);

/// x^alpha by repeated multiplication.
double monomial(const MultiIndex& alpha, std::span<const double> x);

struct Atom {
  Point x;
  double w = 0.0;
};

/// Finitely supported probability measure on R^d. Atoms are kept sorted by
/// location (lexicographic) so that equal measures compare equal.
///
/// Finite support means the sub-Gaussian tail condition holds for every
/// beta > 0; nothing is checked at runtime for it.
class DiscreteMeasure {
 public:
  /// Throws InvalidInput unless dim >= 1, at least one atom, every location
  /// has length dim, weights are strictly positive and sum to 1 within 1e-12.
  DiscreteMeasure(std::size_t dim, std::vector<Atom> atoms);

  static DiscreteMeasure dirac(Point x);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }

  Point mean() const;
  /// E|X|^2
  double second_moment() const;
  /// E|X - v|^2
  double second_moment_about(std::span<const double> v) const;
  /// Population covariance E (X - m)(X - m)^T.
  Eigen::MatrixXd covariance() const;
  /// Largest |x_i - v| over the atoms.
  double radius_about(std::span<const double> v) const;

  bool operator==(const DiscreteMeasure& other) const;

 private:
  std::size_t dim_;
  std::vector<Atom> atoms_;
};

/// Moment tensors E X^alpha for all |alpha| <= max_degree, keyed in graded-lex order.
class MomentTable {
 public:
  MomentTable(std::size_t dim, int max_degree, std::map<MultiIndex, double> values);

  std::size_t dim() const { return dim_; }
  int max_degree() const { return max_degree_; }
  const std::map<MultiIndex, double>& values() const { return values_; }
  double at(const MultiIndex& alpha) const;

 private:
  std::size_t dim_;
  int max_degree_;
  std::map<MultiIndex, double> values_;
};

/// E X^alpha = sum_i w_i x_i^alpha, no sampling.
double moment(const DiscreteMeasure& m, const MultiIndex& alpha);
MomentTable moment_table(const DiscreteMeasure& m, int max_degree);

/// Result of the moment-matching detector: either a finite order n, or the
/// sentinel "all moments through the cap agree".
class MatchOrder {
 public:
  static MatchOrder finite(int n) { return MatchOrder(n); }
  static MatchOrder all_match() { return MatchOrder(-1); }

  bool is_all_match() const { return n_ < 0; }
  /// Throws IndistinguishableMeasures on the sentinel.
  int order() const;

  bool operator==(const MatchOrder&) const = default;

 private:
  explicit MatchOrder(int n) : n_(n) {}
  int n_;
};

/// Largest n <= max_degree with |E X^a - E Y^a| <= tol * (1 v max(|E X^a|, |E Y^a|))
/// for every |a| <= n while some |a| = n + 1 violates it. If every degree up to
/// max_degree agrees the sentinel is returned.
///
/// Whether a pair reads as AllMatch or as a large finite n depends on tol when
/// the moments agree only to rounding.
MatchOrder matching_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu, int max_degree,
                          double tol);

/// Moment differences E X^a - E Y^a for every |a| <= max_degree.
std::map<MultiIndex, double> moment_differences(const DiscreteMeasure& mu,
                                                const DiscreteMeasure& nu, int max_degree);

DiscreteMeasure translate(const DiscreteMeasure& m, std::span<const double> v);

/// Builds (mu, nu) with matching order exactly n: fixed random node sets, nu's
/// weights from the moment system, then a push along the system's null
/// direction to separate the degree-(n+1) moments by at least 0.1.
/// Throws GenerationFailure when no admissible pair is found within the retry cap.
std::pair<DiscreteMeasure, DiscreteMeasure> gen_matched_pair(int n, std::size_t dim,
                                                             std::uint64_t seed);

}  // namespace smoothot
