#pragma once

// Domain types shared by every module: the box domain, Lipschitz constants
// with additive tolerance, legacy observations, the discrete cube that
// supports a product measure, and the shortness (feasibility) checks.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lipuq {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
};

/// Product of closed intervals [a_k, b_k].
class BoxDomain {
 public:
  BoxDomain() = default;
  explicit BoxDomain(std::vector<Interval> bounds);

  std::size_t dim() const { return bounds_.size(); }
  const Interval& operator[](std::size_t k) const { return bounds_[k]; }
  const std::vector<Interval>& bounds() const { return bounds_; }

  bool contains(std::span<const double> x, double tol = 0.0) const;
  Point clamp(std::span<const double> x) const;
  Point lower_corner() const;
  Point upper_corner() const;

 private:
  std::vector<Interval> bounds_;
};

/// Per-coordinate Lipschitz constants L_k and the additive tolerance T.
class LipschitzSpec {
 public:
  LipschitzSpec() = default;
  explicit LipschitzSpec(std::vector<double> constants, double tolerance = 0.0);

  std::size_t dim() const { return constants_.size(); }
  double operator[](std::size_t k) const { return constants_[k]; }
  const std::vector<double>& constants() const { return constants_; }
  double tolerance() const { return tolerance_; }

  LipschitzSpec scaled(double factor) const;

 private:
  std::vector<double> constants_;
  double tolerance_ = 0.0;
};

/// Weighted l1 quasi-metric sum_k L_k |x^k - y^k|.
double lip_distance(const LipschitzSpec& lip, std::span<const double> x,
                    std::span<const double> y);

/// Largest d_L distance from `x` to any point of the box.
double max_distance_in_box(const LipschitzSpec& lip, const BoxDomain& domain,
                           std::span<const double> x);

/// Points paired with scalar values; the common currency of shortness checks.
struct PointSet {
  std::vector<Point> points;
  std::vector<double> values;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Legacy observations G|_O. Duplicate inputs are retained.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t dim) : dim_(dim) {}
  Dataset(std::vector<Point> points, std::vector<double> values,
          std::vector<std::string> labels = {});

  void add(Point x, double value, std::string label = {});

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  const PointSet& samples() const { return samples_; }
  const Point& point(std::size_t i) const { return samples_.points[i]; }
  double value(std::size_t i) const { return samples_.values[i]; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Rows `indices`, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Throws ContractError naming the first point outside `domain`.
  void check_inside(const BoxDomain& domain) const;

 private:
  std::size_t dim_ = 0;
  PointSet samples_;
  std::vector<std::string> labels_;
};

/// Entry (i, j) = |y_i - y'_j| - d_L(x_i, x'_j) - T.
class ShortnessMatrix {
 public:
  ShortnessMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

  /// Largest entry and its position; (-inf, 0, 0) for an empty matrix.
  struct Extreme {
    double value;
    std::size_t row;
    std::size_t col;
  };
  Extreme max() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

ShortnessMatrix shortness_matrix(const PointSet& a, const PointSet& b,
                                 const LipschitzSpec& lip);

bool is_short(const PointSet& a, const PointSet& b, const LipschitzSpec& lip,
              double short_tol = 0.0);

/// A pair of observations violating the Lipschitz-with-tolerance constraint.
struct PairViolation {
  std::size_t first;
  std::size_t second;
  double excess;  // |G(z) - G(z')| - d_L(z, z') - T  (> 0)
};

/// Relative slack below which a violation counts as rounding.
inline constexpr double kRoundingSlack = 1e-12;

/// Worst violating pair, or nullopt if the dataset is short w.r.t. `lip`.
std::optional<PairViolation> worst_violation(const Dataset& data, const LipschitzSpec& lip);

bool lipschitz_feasible(const Dataset& data, const LipschitzSpec& lip);

// ---------------------------------------------------------------------------
// Discrete cube

inline constexpr std::size_t kMaxCubeDim = 20;

/// Vertex epsilon of the Hamming cube {0,1}^K. Ordering is lexicographic with
/// coordinate 0 as the most significant bit, so bits() is also the rank.
class CubeIndex {
 public:
  CubeIndex(std::size_t dim, std::uint32_t bits);

  static std::size_t count(std::size_t dim) { return std::size_t{1} << dim; }

  std::size_t dim() const { return dim_; }
  std::uint32_t bits() const { return bits_; }
  bool bit(std::size_t k) const { return ((bits_ >> (dim_ - 1 - k)) & 1u) != 0; }
  CubeIndex flipped(std::size_t k) const;
  std::string str() const;

  auto operator<=>(const CubeIndex&) const = default;

 private:
  std::size_t dim_;
  std::uint32_t bits_;
};

std::vector<Point> cube_points(std::span<const double> x0, std::span<const double> x1);

/// Unordered cube edges (eps, eps') with eps < eps' differing in exactly one bit.
std::vector<std::pair<CubeIndex, CubeIndex>> edge_pairs(std::size_t dim);

/// All unordered pairs eps < eps'.
std::vector<std::pair<CubeIndex, CubeIndex>> all_pairs(std::size_t dim);

// ---------------------------------------------------------------------------
// Scenario: a candidate (g, mu) on the cube C(x0, x1)

/// Per-coordinate support size: 1 pins x1^k = x0^k and p_k = 1.
using SupportShape = std::vector<int>;

SupportShape full_support(std::size_t dim);
void check_support_shape(const SupportShape& shape, std::size_t dim);

struct Scenario {
  Point x0;
  Point x1;
  std::vector<double> p;  // mass of x0^k in the k-th marginal
  std::vector<double> y;  // value at each cube vertex, CubeIndex order
  SupportShape shape;

  std::size_t dim() const { return x0.size(); }
  std::size_t vertex_count() const { return y.size(); }

  Point vertex(std::uint32_t eps) const;
  std::vector<Point> vertices() const { return cube_points(x0, x1); }

  /// prod_k p_k^{1 - eps_k} (1 - p_k)^{eps_k}
  double weight(std::uint32_t eps) const;
  std::vector<double> weights() const;

  PointSet as_point_set() const;

  /// Throws ContractError on size mismatch, p outside [0,1] or a support
  /// shape that is not respected.
  void check_invariants() const;
};

/// sum_eps w(eps) r(eps)
double expectation(const Scenario& s, std::span<const double> r);

inline double mean_value(const Scenario& s) { return expectation(s, s.y); }

/// mu[y <= theta]. Returns exactly 1 when every vertex of positive mass fails.
double failure_probability(const Scenario& s, double theta);

/// Number of free decision variables: 2K + 2^K + K at full support.
std::size_t decision_variable_count(std::size_t dim);

// ---------------------------------------------------------------------------

/// Domain, Lipschitz model, legacy data, mean lower bound m and threshold theta.
class ProblemSpec {
 public:
  /// Throws ContractError on dimension mismatch or out-of-domain data, and
  /// InfeasibleError when the data are not short w.r.t. `lip`.
  ProblemSpec(BoxDomain domain, LipschitzSpec lip, Dataset data, double mean_lower_bound,
              double theta = 0.0);

  std::size_t dim() const { return domain_.dim(); }
  const BoxDomain& domain() const { return domain_; }
  const LipschitzSpec& lip() const { return lip_; }
  const Dataset& data() const { return data_; }
  double mean_lower_bound() const { return m_; }
  double theta() const { return theta_; }

  ProblemSpec with_data(Dataset data) const;
  ProblemSpec with_theta(double theta) const;
  ProblemSpec with_mean(double m) const;
  ProblemSpec with_lipschitz(LipschitzSpec lip) const;

 private:
  BoxDomain domain_;
  LipschitzSpec lip_;
  Dataset data_;
  double m_;
  double theta_;
};

}  // namespace lipuq
