#pragma once

// McShane extension envelopes Y-/Y+ of the legacy data, the polygon objective
// used by the subdiameter problem, the gap size Gamma, the Markov maximum M
// and gap-minimising Lipschitz constants.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lipuq/core.hpp"
#include "lipuq/solver.hpp"

namespace lipuq {

/// A real number or an explicit +/- infinity sentinel.
class ExtendedReal {
 public:
  enum class Kind { Finite, PlusInfinity, MinusInfinity };

  ExtendedReal() = default;
  explicit ExtendedReal(double v) : kind_(Kind::Finite), value_(v) {}
  static ExtendedReal plus_infinity() { return ExtendedReal(Kind::PlusInfinity); }
  static ExtendedReal minus_infinity() { return ExtendedReal(Kind::MinusInfinity); }

  Kind kind() const { return kind_; }
  bool finite() const { return kind_ == Kind::Finite; }
  /// Throws ContractError for the sentinels.
  double value() const;
  std::string str() const;

 private:
  explicit ExtendedReal(Kind k) : kind_(k) {}
  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

namespace envelope {

/// Least and greatest feasible values of a d_L-short (with tolerance T)
/// extension of the data at a point. The referenced data and constants must
/// outlive the envelope.
class Envelope {
 public:
  Envelope(const Dataset& data, const LipschitzSpec& lip);
  explicit Envelope(const ProblemSpec& spec) : Envelope(spec.data(), spec.lip()) {}
  Envelope(Dataset&&, const LipschitzSpec&) = delete;
  Envelope(const Dataset&, LipschitzSpec&&) = delete;
  explicit Envelope(ProblemSpec&&) = delete;

  bool empty() const { return data_->empty(); }

  /// min_z G(z) + d_L(x, z) + T, or +inf for an empty dataset.
  ExtendedReal upper(std::span<const double> x) const;
  /// max_z G(z) - d_L(x, z) - T, or -inf for an empty dataset.
  ExtendedReal lower(std::span<const double> x) const;

  // Unchecked variants for hot loops; the dataset must be non-empty.
  double upper_value(std::span<const double> x) const;
  double lower_value(std::span<const double> x) const;

  /// Observations whose cone attains upper(x) within `tol`.
  std::vector<std::size_t> upper_binding(std::span<const double> x, double tol) const;

  const Dataset& data() const { return *data_; }
  const LipschitzSpec& lip() const { return *lip_; }

 private:
  const Dataset* data_;
  const LipschitzSpec* lip_;
};

/// Best corner of the polygon of feasible (y, y') for a pair x, x' that
/// differ only in coordinate k.
struct PolygonCorner {
  double value = 0.0;  // max |y - y'|
  double y = 0.0;
  double y_prime = 0.0;
};

/// Maximum of |y - y'| over y in [Y-(x), Y+(x)], y' in [Y-(x'), Y+(x')],
/// |y - y'| <= d_L(x, x') + T. Throws InfeasibleError naming the point when an
/// envelope is empty there, ContractError when x, x' differ outside k.
PolygonCorner polygon_maximizer(const Envelope& env, std::span<const double> x,
                                std::span<const double> x_prime, std::size_t k);

double polygon_objective(const Envelope& env, std::span<const double> x,
                         std::span<const double> x_prime, std::size_t k);

/// A global supremum found by the solver, with a replayable trace.
struct SearchReport {
  ExtendedReal value;
  Point argmax;
  solver::Trace trace;
  std::uint64_t seed = 0;
  long evaluations = 0;
};

/// Gamma = sup_x min_z d_L(x, z): a best-found (lower) estimate.
SearchReport gap_size(const BoxDomain& domain, const Dataset& data, const LipschitzSpec& lip,
                      const solver::SolverConfig& config);
inline SearchReport gap_size(const ProblemSpec& spec, const solver::SolverConfig& config) {
  return gap_size(spec.domain(), spec.data(), spec.lip(), config);
}

struct MarkovMaximum {
  SearchReport search;
  std::vector<std::size_t> binding;  // observations active at the maximiser
};

/// M = sup_x Y+(x) and its maximiser.
MarkovMaximum markov_max(const ProblemSpec& spec, const solver::SolverConfig& config);

struct MarkovBound {
  double value = 1.0;
  bool vacuous = false;  // theta >= M
};

/// (M - m)/(M - theta) clamped to [0, 1].
MarkovBound markov_bound(double M, double m, double theta);

struct LipschitzFit {
  LipschitzSpec lip;
  SearchReport gap;
  solver::Trace trace;
  std::uint64_t seed = 0;
  long evaluations = 0;
};

/// Feasible constants inside `bounds` approximately minimising Gamma. Throws
/// InfeasibleError naming a violating pair when even the upper corner of the
/// box is infeasible.
LipschitzFit fit_lipschitz(const BoxDomain& domain, const Dataset& data, double tolerance,
                           const std::vector<Interval>& bounds, const solver::SolverConfig& config);

}  // namespace envelope
}  // namespace lipuq
