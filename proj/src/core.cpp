#include "lipuq/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipuq/errors.hpp"

namespace lipuq {

namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << got << " vs " << want << ")";
    throw ContractError(os.str());
  }
}

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ')';
  return os.str();
}

}  // namespace

BoxDomain::BoxDomain(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
  if (bounds_.empty()) throw ContractError("BoxDomain: at least one coordinate is required");
  for (std::size_t k = 0; k < bounds_.size(); ++k) {
    const auto& b = bounds_[k];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi) {
      std::ostringstream os;
      os << "BoxDomain: coordinate " << k << " has invalid bounds [" << b.lo << ", " << b.hi << "]";
      throw ContractError(os.str());
    }
  }
}

bool BoxDomain::contains(std::span<const double> x, double tol) const {
  require_dim(x.size(), dim(), "BoxDomain::contains");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] < bounds_[k].lo - tol || x[k] > bounds_[k].hi + tol) return false;
  }
  return true;
}

Point BoxDomain::clamp(std::span<const double> x) const {
  require_dim(x.size(), dim(), "BoxDomain::clamp");
  Point out(x.begin(), x.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k], bounds_[k].lo, bounds_[k].hi);
  return out;
}

Point BoxDomain::lower_corner() const {
  Point out(dim());
  for (std::size_t k = 0; k < dim(); ++k) out[k] = bounds_[k].lo;
  return out;
}

Point BoxDomain::upper_corner() const {
  Point out(dim());
  for (std::size_t k = 0; k < dim(); ++k) out[k] = bounds_[k].hi;
  return out;
}

LipschitzSpec::LipschitzSpec(std::vector<double> constants, double tolerance)
    : constants_(std::move(constants)), tolerance_(tolerance) {
  if (constants_.empty()) throw ContractError("LipschitzSpec: at least one constant is required");
  for (std::size_t k = 0; k < constants_.size(); ++k) {
    if (!(constants_[k] >= 0.0) || !std::isfinite(constants_[k])) {
      std::ostringstream os;
      os << "LipschitzSpec: L[" << k << "] = " << constants_[k] << " must be finite and >= 0";
      throw ContractError(os.str());
    }
  }
  if (!(tolerance_ >= 0.0) || !std::isfinite(tolerance_)) {
    throw ContractError("LipschitzSpec: tolerance T must be finite and >= 0");
  }
}

LipschitzSpec LipschitzSpec::scaled(double factor) const {
  std::vector<double> c = constants_;
  for (auto& v : c) v *= factor;
  return LipschitzSpec(std::move(c), tolerance_);
}

double lip_distance(const LipschitzSpec& lip, std::span<const double> x,
                    std::span<const double> y) {
  require_dim(x.size(), lip.dim(), "lip_distance");
  require_dim(y.size(), lip.dim(), "lip_distance");
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d += lip[k] * std::abs(x[k] - y[k]);
  return d;
}

double max_distance_in_box(const LipschitzSpec& lip, const BoxDomain& domain,
                           std::span<const double> x) {
  require_dim(x.size(), domain.dim(), "max_distance_in_box");
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    d += lip[k] * std::max(std::abs(x[k] - domain[k].lo), std::abs(domain[k].hi - x[k]));
  }
  return d;
}

// ---------------------------------------------------------------------------

Dataset::Dataset(std::vector<Point> points, std::vector<double> values,
                 std::vector<std::string> labels) {
  if (points.size() != values.size()) throw ContractError("Dataset: points/values length mismatch");
  if (!labels.empty() && labels.size() != points.size()) {
    throw ContractError("Dataset: labels length mismatch");
  }
  if (!points.empty()) dim_ = points.front().size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    add(std::move(points[i]), values[i], labels.empty() ? std::string{} : std::move(labels[i]));
  }
}

void Dataset::add(Point x, double value, std::string label) {
  if (dim_ == 0) dim_ = x.size();
  require_dim(x.size(), dim_, "Dataset::add");
  if (!std::isfinite(value)) throw ContractError("Dataset::add: non-finite value");
  for (double c : x) {
    if (!std::isfinite(c)) throw ContractError("Dataset::add: non-finite coordinate");
  }
  if (label.empty()) label = "z" + std::to_string(samples_.size());
  samples_.points.push_back(std::move(x));
  samples_.values.push_back(value);
  labels_.push_back(std::move(label));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(dim_);
  for (std::size_t i : indices) {
    if (i >= size()) throw ContractError("Dataset::subset: index out of range");
    out.add(point(i), value(i), label(i));
  }
  return out;
}

void Dataset::check_inside(const BoxDomain& domain) const {
  if (empty()) return;
  require_dim(dim_, domain.dim(), "Dataset::check_inside");
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& x = point(i);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] < domain[k].lo || x[k] > domain[k].hi) {
        std::ostringstream os;
        os << "observation '" << label(i) << "' at " << format_point(x)
           << " lies outside coordinate " << k << " bounds [" << domain[k].lo << ", "
           << domain[k].hi << "]";
        throw ContractError(os.str());
      }
    }
  }
}

// ---------------------------------------------------------------------------

ShortnessMatrix::Extreme ShortnessMatrix::max() const {
  Extreme e{-std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      if ((*this)(i, j) > e.value) e = {(*this)(i, j), i, j};
    }
  }
  return e;
}

ShortnessMatrix shortness_matrix(const PointSet& a, const PointSet& b,
                                 const LipschitzSpec& lip) {
  ShortnessMatrix m(a.size(), b.size());
  const double t = lip.tolerance();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      m(i, j) = std::abs(a.values[i] - b.values[j]) - lip_distance(lip, a.points[i], b.points[j]) - t;
    }
  }
  return m;
}

bool is_short(const PointSet& a, const PointSet& b, const LipschitzSpec& lip, double short_tol) {
  if (short_tol < 0.0) throw ContractError("is_short: short_tol must be >= 0");
  const double t = lip.tolerance();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double e =
          std::abs(a.values[i] - b.values[j]) - lip_distance(lip, a.points[i], b.points[j]) - t;
      if (e > short_tol) return false;
    }
  }
  return true;
}

std::optional<PairViolation> worst_violation(const Dataset& data, const LipschitzSpec& lip) {
  std::optional<PairViolation> worst;
  const auto& s = data.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double d = lip_distance(lip, s.points[i], s.points[j]) + lip.tolerance();
      const double e = std::abs(s.values[i] - s.values[j]) - d;
      // decimal data that is tight by construction may overshoot by a few ulps
      const double slack = kRoundingSlack * std::max({1.0, std::abs(s.values[i]), std::abs(s.values[j]), d});
      if (e > slack && (!worst || e > worst->excess)) worst = PairViolation{i, j, e};
    }
  }
  return worst;
}

bool lipschitz_feasible(const Dataset& data, const LipschitzSpec& lip) {
  if (!data.empty()) require_dim(data.dim(), lip.dim(), "lipschitz_feasible");
  return !worst_violation(data, lip).has_value();
}

// ---------------------------------------------------------------------------

CubeIndex::CubeIndex(std::size_t dim, std::uint32_t bits) : dim_(dim), bits_(bits) {
  if (dim == 0 || dim > kMaxCubeDim) throw ContractError("CubeIndex: unsupported dimension");
  if (bits >= count(dim)) throw ContractError("CubeIndex: bits out of range");
}

CubeIndex CubeIndex::flipped(std::size_t k) const {
  return CubeIndex(dim_, bits_ ^ (1u << (dim_ - 1 - k)));
}

std::string CubeIndex::str() const {
  std::string s(dim_, '0');
  for (std::size_t k = 0; k < dim_; ++k) s[k] = bit(k) ? '1' : '0';
  return s;
}

std::vector<Point> cube_points(std::span<const double> x0, std::span<const double> x1) {
  require_dim(x1.size(), x0.size(), "cube_points");
  const std::size_t dim = x0.size();
  if (dim == 0 || dim > kMaxCubeDim) throw ContractError("cube_points: unsupported dimension");
  const std::size_t n = CubeIndex::count(dim);
  std::vector<Point> out(n, Point(dim));
  for (std::size_t e = 0; e < n; ++e) {
    for (std::size_t k = 0; k < dim; ++k) {
      const bool b = ((e >> (dim - 1 - k)) & 1u) != 0;
      out[e][k] = b ? x1[k] : x0[k];
    }
  }
  return out;
}

std::vector<std::pair<CubeIndex, CubeIndex>> edge_pairs(std::size_t dim) {
  if (dim == 0 || dim > kMaxCubeDim) throw ContractError("edge_pairs: unsupported dimension");
  std::vector<std::pair<CubeIndex, CubeIndex>> out;
  out.reserve(dim * (CubeIndex::count(dim) / 2));
  const auto n = static_cast<std::uint32_t>(CubeIndex::count(dim));
  for (std::uint32_t e = 0; e < n; ++e) {
    for (std::size_t k = 0; k < dim; ++k) {
      const std::uint32_t f = e ^ (1u << (dim - 1 - k));
      if (e < f) out.emplace_back(CubeIndex(dim, e), CubeIndex(dim, f));
    }
  }
  return out;
}

std::vector<std::pair<CubeIndex, CubeIndex>> all_pairs(std::size_t dim) {
  if (dim == 0 || dim > kMaxCubeDim) throw ContractError("all_pairs: unsupported dimension");
  std::vector<std::pair<CubeIndex, CubeIndex>> out;
  const auto n = static_cast<std::uint32_t>(CubeIndex::count(dim));
  for (std::uint32_t e = 0; e < n; ++e) {
    for (std::uint32_t f = e + 1; f < n; ++f) out.emplace_back(CubeIndex(dim, e), CubeIndex(dim, f));
  }
  return out;
}

// ---------------------------------------------------------------------------

SupportShape full_support(std::size_t dim) { return SupportShape(dim, 2); }

void check_support_shape(const SupportShape& shape, std::size_t dim) {
  require_dim(shape.size(), dim, "support shape");
  for (int s : shape) {
    if (s != 1 && s != 2) throw ContractError("support shape entries must be 1 or 2");
  }
}

Point Scenario::vertex(std::uint32_t eps) const {
  const std::size_t k_dim = dim();
  Point out(k_dim);
  for (std::size_t k = 0; k < k_dim; ++k) {
    out[k] = ((eps >> (k_dim - 1 - k)) & 1u) ? x1[k] : x0[k];
  }
  return out;
}

double Scenario::weight(std::uint32_t eps) const {
  const std::size_t k_dim = dim();
  double w = 1.0;
  for (std::size_t k = 0; k < k_dim; ++k) {
    w *= ((eps >> (k_dim - 1 - k)) & 1u) ? (1.0 - p[k]) : p[k];
  }
  return w;
}

std::vector<double> Scenario::weights() const {
  std::vector<double> w(vertex_count());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = weight(static_cast<std::uint32_t>(e));
  return w;
}

PointSet Scenario::as_point_set() const { return PointSet{vertices(), y}; }

void Scenario::check_invariants() const {
  const std::size_t k_dim = dim();
  if (k_dim == 0 || k_dim > kMaxCubeDim) throw ContractError("Scenario: unsupported dimension");
  require_dim(x1.size(), k_dim, "Scenario x1");
  require_dim(p.size(), k_dim, "Scenario p");
  require_dim(y.size(), CubeIndex::count(k_dim), "Scenario y");
  check_support_shape(shape, k_dim);
  for (std::size_t k = 0; k < k_dim; ++k) {
    if (!(p[k] >= 0.0 && p[k] <= 1.0)) throw ContractError("Scenario: p outside [0, 1]");
    if (shape[k] == 1 && (x0[k] != x1[k] || p[k] != 1.0)) {
      throw ContractError("Scenario: collapsed coordinate must have x0 = x1 and p = 1");
    }
  }
}

double expectation(const Scenario& s, std::span<const double> r) {
  require_dim(r.size(), s.vertex_count(), "expectation");
  double acc = 0.0;
  for (std::size_t e = 0; e < r.size(); ++e) acc += s.weight(static_cast<std::uint32_t>(e)) * r[e];
  return acc;
}

double failure_probability(const Scenario& s, double theta) {
  double fail = 0.0;
  bool any_pass = false;
  for (std::size_t e = 0; e < s.vertex_count(); ++e) {
    const double w = s.weight(static_cast<std::uint32_t>(e));
    if (s.y[e] <= theta) {
      fail += w;
    } else if (w > 0.0) {
      any_pass = true;
    }
  }
  return any_pass ? std::min(fail, 1.0) : 1.0;
}

std::size_t decision_variable_count(std::size_t dim) {
  return 2 * dim + CubeIndex::count(dim) + dim;
}

// ---------------------------------------------------------------------------

ProblemSpec::ProblemSpec(BoxDomain domain, LipschitzSpec lip, Dataset data, double mean_lower_bound,
                         double theta)
    : domain_(std::move(domain)),
      lip_(std::move(lip)),
      data_(std::move(data)),
      m_(mean_lower_bound),
      theta_(theta) {
  require_dim(lip_.dim(), domain_.dim(), "ProblemSpec Lipschitz constants");
  if (!data_.empty()) require_dim(data_.dim(), domain_.dim(), "ProblemSpec data");
  if (!std::isfinite(m_) || !std::isfinite(theta_)) {
    throw ContractError("ProblemSpec: m and theta must be finite");
  }
  data_.check_inside(domain_);
  if (auto v = worst_violation(data_, lip_)) {
    std::ostringstream os;
    os << "observations '" << data_.label(v->first) << "' and '" << data_.label(v->second)
       << "' violate the Lipschitz constraint by " << v->excess;
    throw InfeasibleError(os.str());
  }
}

ProblemSpec ProblemSpec::with_data(Dataset data) const {
  return ProblemSpec(domain_, lip_, std::move(data), m_, theta_);
}

ProblemSpec ProblemSpec::with_theta(double theta) const {
  ProblemSpec out = *this;
  out.theta_ = theta;
  return out;
}

ProblemSpec ProblemSpec::with_mean(double m) const {
  ProblemSpec out = *this;
  out.m_ = m;
  return out;
}

ProblemSpec ProblemSpec::with_lipschitz(LipschitzSpec lip) const {
  return ProblemSpec(domain_, std::move(lip), data_, m_, theta_);
}

}  // namespace lipuq
