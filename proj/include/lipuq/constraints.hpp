#pragma once

// The constraint-solver chain applied to every scenario candidate before the
// probability objective sees it: C' (normalize weights), C'' (impose mean)
// and C (impose shortness, an inner DE loop). Also the raw-vector codec and
// an independent verifier.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipuq/core.hpp"
#include "lipuq/solver.hpp"

namespace lipuq::solver {

/// Raw outer-loop vector <-> Scenario. Layout: x0 (K coordinates), x1 and p
/// for the coordinates with support 2, then one y per representative vertex.
/// Collapsed coordinates have x1 = x0 and p = 1; vertices that differ from a
/// representative only in collapsed bits carry zero mass and copy its y.
class ScenarioCodec {
 public:
  ScenarioCodec(const ProblemSpec& spec, SupportShape shape, double y_slack);

  std::size_t size() const { return bounds_.size(); }
  const Box& bounds() const { return bounds_; }
  const SupportShape& shape() const { return shape_; }
  std::size_t dim() const { return shape_.size(); }

  /// Coordinates with support size 2, ascending.
  const std::vector<std::size_t>& full_coordinates() const { return full_; }
  /// Vertices whose y is a free variable, ascending CubeIndex order.
  const std::vector<std::uint32_t>& representatives() const { return reps_; }
  std::uint32_t representative_of(std::uint32_t eps) const { return eps & full_mask_; }
  /// Index of the vertex pinned by the forced-failure variant: the last
  /// representative, i.e. x1 on every free coordinate.
  std::uint32_t pinned_vertex() const { return reps_.back(); }

  /// Builds positions and raw p (not yet clamped); y is clamped into the
  /// envelope [Y-(x_eps), Y+(x_eps)].
  Scenario decode(std::span<const double> raw) const;
  /// Inverse of encode: no clamping, so encode/decode_exact round-trips.
  Scenario decode_exact(std::span<const double> raw) const;
  std::vector<double> encode(const Scenario& s) const;

  /// Copies representative values onto the zero-mass duplicates.
  void spread(Scenario& s) const;

 private:
  const ProblemSpec* spec_;
  SupportShape shape_;
  std::vector<std::size_t> full_;
  std::vector<std::uint32_t> reps_;
  std::uint32_t full_mask_ = 0;
  Box bounds_;
};

/// C': clamp each p_k into [0, 1]; two-atom marginals then sum to 1.
Scenario normalize_weights(Scenario s);

/// C'': if E[y] < m, add (m - E[y]) to every y. With a pinned vertex the
/// shift is spread over the remaining mass and the pinned value is kept.
Scenario impose_mean(Scenario s, double m, std::optional<std::uint32_t> pinned = std::nullopt);

/// Sum of max(0, dist - short_tol) over the cube pairs and every
/// vertex-vs-datum pair, where dist = |y - y'| - d_L - T.
double shortness_residual(const Scenario& s, const Dataset& data, const LipschitzSpec& lip,
                          double short_tol, bool all_pairs);

/// Cube pairs whose constraints are enforced: the K 2^(K-1) edges when T = 0,
/// all pairs otherwise (edge shortness only implies full shortness at T = 0).
bool needs_all_pairs(const LipschitzSpec& lip);

struct ShortnessOptions {
  std::optional<std::uint32_t> pinned;  // vertex held at its current y
  std::uint64_t stream = 0;             // inner-loop seed
};

struct ShortnessResult {
  Scenario scenario;
  double residual = 0.0;  // inner objective at the returned scenario
  bool feasible = true;
  long evaluations = 0;
  bool provably_infeasible = false;
};

/// C: inner DE (value-to-reach 0) over the representative y values, and
/// x0/x1 when config.inner_adjust_positions is set. C' and C'' are
/// re-applied inside the loop. The first member is a direct projection onto
/// the feasible set, so the loop usually stops after one evaluation.
ShortnessResult impose_shortness(Scenario s, const ProblemSpec& spec, const ScenarioCodec& codec,
                                 const SolverConfig& config, const ShortnessOptions& options = {});

/// Convenience overload building a codec from the scenario's own shape.
ShortnessResult impose_shortness(Scenario s, const ProblemSpec& spec, const SolverConfig& config,
                                 const ShortnessOptions& options = {});

struct ChainResult {
  Scenario scenario;
  double residual = 0.0;
  bool feasible = true;
  long inner_evaluations = 0;
};

/// decode -> C' -> (pin) -> C'' -> C for one raw vector.
class ConstraintChain {
 public:
  ConstraintChain(const ProblemSpec& spec, const ScenarioCodec& codec, const SolverConfig& config,
                  bool pin_failure);

  ChainResult apply(std::span<const double> raw, std::uint64_t stream) const;
  bool pins_failure() const { return pin_; }

 private:
  const ProblemSpec* spec_;
  const ScenarioCodec* codec_;
  const SolverConfig* config_;
  bool pin_;
};

/// Independent re-check of a scenario against the problem, outside the solver.
struct VerificationRecord {
  bool valid = true;
  double weight_sum = 0.0;
  double mean = 0.0;
  double mean_slack = 0.0;               // E[y] - m
  double max_scenario_violation = 0.0;   // over all cube pairs
  double max_data_violation = 0.0;       // over all vertex-vs-datum pairs
  double objective = 0.0;                // recomputed mu[y <= theta]
  std::vector<std::string> violations;   // one message per failed check
};

VerificationRecord verify(const Scenario& s, const ProblemSpec& spec, const SolverConfig& config,
                          std::optional<double> claimed_objective = std::nullopt);

}  // namespace lipuq::solver
