#pragma once

// Differential evolution (DE/rand/1/bin) with explicit constraint solvers:
// every trial vector is passed through a constraint chain before the
// objective sees it, so the effective objective is F(C(X)). No penalty terms.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lipuq::solver {

enum class Direction { Minimize, Maximize };

/// Forced-failure variant for probability-of-failure solves: pin the last
/// cube vertex's value to theta. Auto enables it only for K = 1.
enum class ForcedFailure { Auto, On, Off };

struct SolverConfig {
  int outer_npop = 32;
  int outer_ngen = 100;  // change-over-generations window
  double outer_tol = 1e-6;
  int outer_max_generations = 20000;
  int inner_npop = 40;
  double inner_tol = 1e-9;
  int inner_budget = 1000;
  double short_tol = 1e-6;
  double mean_tol = 1e-9;
  std::uint64_t seed = 20120401;
  double de_weight = 0.8;
  double de_crossover = 0.9;
  int restarts = 3;
  bool inner_adjust_positions = false;
  ForcedFailure forced_failure = ForcedFailure::Auto;
  int threads = 1;

  /// Throws ContractError when a field is out of range.
  void validate() const;
};

/// Deterministic 64-bit seed mixing (splitmix64 over the inputs).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Fitness of one evaluated candidate, always in minimisation sense.
/// Feasible candidates beat infeasible ones; infeasible ones are ranked by
/// their constraint residual.
struct Fitness {
  double objective = 0.0;
  double residual = 0.0;
  bool feasible = true;
};

bool better(const Fitness& a, const Fitness& b);

class Termination {
 public:
  enum class Kind { ChangeOverGenerations, ValueToReach };

  static Termination change_over_generations(double tol, int ngen);
  static Termination value_to_reach(double target, double tol);

  Kind kind() const { return kind_; }
  double tol() const { return tol_; }
  int ngen() const { return ngen_; }
  double target() const { return target_; }

  /// `history` holds the best fitness after each generation (index 0 is the
  /// initial population).
  bool satisfied(std::span<const Fitness> history) const;

 private:
  Kind kind_ = Kind::ChangeOverGenerations;
  double tol_ = 0.0;
  int ngen_ = 0;
  double target_ = 0.0;
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t size() const { return lo.size(); }
};

struct Evaluation {
  std::vector<double> vector;  // the (possibly repaired) member kept in the population
  Fitness fitness;
  long inner_evaluations = 0;
};

/// Maps a raw trial vector to an evaluated candidate. `stream` is a
/// per-candidate seed derived from (seed, generation, index).
using Evaluator = std::function<Evaluation(std::vector<double> raw, std::uint64_t stream)>;

/// Plain objective and constraint-solver pieces, for callers that do not need
/// a fused evaluator.
using Objective = std::function<double(std::span<const double>)>;
struct ChainOutput {
  std::vector<double> vector;
  double residual = 0.0;
  bool feasible = true;
  long evaluations = 0;
};
using Chain = std::function<ChainOutput(std::vector<double>, std::uint64_t stream)>;

/// Fuses F and C into F(C(X)); an empty chain is the identity.
Evaluator compose(Objective objective, Chain chain, Direction direction);

struct TraceRow {
  long generation = 0;
  double best_value = 0.0;  // caller's sign; NaN while nothing is feasible
  double residual = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;

  /// Columns: generation,best_value,feasibility_residual
  void write_csv(std::ostream& os) const;
};

struct DeOptions {
  int npop = 32;
  double weight = 0.8;
  double crossover = 0.9;
  int max_generations = 20000;
  std::uint64_t seed = 0;
  int threads = 1;
  Termination termination = Termination::change_over_generations(1e-6, 100);
  std::vector<std::vector<double>> initial_members;  // warm-start members
};

struct DeResult {
  std::vector<double> best;
  Fitness best_fitness;
  double best_value = 0.0;  // caller's sign
  Trace trace;
  long evaluations = 0;
  long inner_evaluations = 0;
  int generations = 0;
  std::string stop_reason;
  std::vector<Evaluation> population;
};

DeResult de_optimize(const Evaluator& evaluate, const Box& bounds, const DeOptions& options,
                     Direction direction);

/// Convenience overload matching the F(C(X)) formulation.
DeResult de_optimize(const Objective& objective, const Box& bounds, const Chain& chain,
                     const DeOptions& options, Direction direction);

/// Outer-loop DE options taken from a solver configuration.
DeOptions outer_options(const SolverConfig& config, std::uint64_t seed);

}  // namespace lipuq::solver
