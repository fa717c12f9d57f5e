#pragma once

// Redundant and non-binding observations, and the active-set loop that
// solves a large dataset through a small enforced subset of it.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lipuq/core.hpp"
#include "lipuq/diameter.hpp"
#include "lipuq/pof.hpp"
#include "lipuq/solver.hpp"

namespace lipuq::redundancy {

/// Sub-box V of the domain.
using Region = BoxDomain;

/// True when every interval of V lies inside the matching domain interval.
bool region_within(const Region& v, const BoxDomain& domain);

struct Datum {
  Point x;
  double value = 0.0;
};

/// Closest point of V to x: a per-coordinate clamp.
Point project(std::span<const double> x, const Region& v);

/// Sufficient test for z0 being redundant on V with respect to `data_in_v`:
/// some z' and z'' in V bound the cone of z0 from above and below at the
/// projection p of z0 onto V. False is inconclusive.
/// Throws ContractError if z0 lies in V, `data_in_v` is empty or holds a
/// point outside V.
bool is_redundant_sufficient(const Datum& z0, const Region& v, const Dataset& data_in_v,
                             const LipschitzSpec& lip);

/// Grid oracle for redundancy: at every sample x of V (a regular grid, the
/// data points, and z0 when it lies in V) the data-feasible y interval must
/// sit inside the cone interval of z0. Meant for tests on K <= 3.
bool is_redundant_definitional(const Datum& z0, const Region& v, const Dataset& data,
                               const LipschitzSpec& lip, int grid_resolution = 64);

/// Both points of a diameter maximiser are feasible for z0 (slack T + tol).
/// True means adding z0 leaves D^_k unchanged.
bool is_nonbinding_diameter(const Datum& z0, const diameter::DiameterReport& maximizer,
                            const LipschitzSpec& lip, double tol = 0.0);

/// All 2^K cube points of the scenario are feasible for z0 (slack T + tol).
bool is_nonbinding_pof(const Datum& z0, const Scenario& witness, const LipschitzSpec& lip,
                       double tol = 0.0);

enum class Objective { Diameter, Pof };

struct ActiveSetStep {
  int iteration = 0;
  std::vector<std::size_t> added;  // data indices joining the enforced set
  double value = 0.0;              // extreme value with the enlarged set
};

struct ActiveSetState {
  std::vector<std::size_t> enforced;    // ascending
  std::vector<std::size_t> candidates;  // ascending, disjoint from enforced
  int iteration = 0;
  std::vector<ActiveSetStep> history;
};

struct ActiveSetOptions {
  Objective objective = Objective::Pof;
  std::size_t k = 0;           // coordinate for Objective::Diameter
  SupportShape shape;          // support shape for Objective::Pof
  bool single_winner = false;  // admit one maximiser per iteration, not all ties
  int max_iterations = 0;      // 0: the number of observations
};

struct ActiveSetResult {
  double value = 0.0;
  std::optional<diameter::DiameterReport> diameter;
  std::optional<pof::PofReport> pof;
  ActiveSetState state;
  bool terminated = true;  // false when the iteration cap stopped the loop
  long evaluations = 0;    // outer evaluations over every solve
  int solves = 0;
};

/// The active-set loop: score each candidate against the enforced set,
/// enforce the best scorers, re-solve, and keep as candidates only the
/// observations the new extremiser violates. Stops when none remain.
ActiveSetResult active_set_solve(const ProblemSpec& spec, const solver::SolverConfig& config,
                                 const ActiveSetOptions& options = {});

}  // namespace lipuq::redundancy
