#pragma once

// Optimal bounds on the failure probability mu[g <= theta] over all short
// interpolants of the data and product measures with E[g] >= m, via the
// reduced problem on the discrete cube, plus the closed form for a single
// observation on [0, 1].

#include <cstdint>
#include <string>
#include <vector>

#include "lipuq/constraints.hpp"
#include "lipuq/core.hpp"
#include "lipuq/solver.hpp"

namespace lipuq::pof {

enum class Status {
  Ok,
  NoFeasibleFailure,  // forced failure found no feasible failing atom: P^ = 0
  Infeasible,         // no admissible scenario at all
};

const char* to_string(Status s);

struct MarkovCheck {
  double M = 0.0;
  Point argmax;
  double bound = 1.0;
  bool vacuous = false;
};

struct PofOptions {
  solver::Direction direction = solver::Direction::Maximize;
  SupportShape shape;                              // empty: full support
  std::vector<std::vector<double>> warm_start;     // raw members for every restart
  std::optional<MarkovCheck> markov;               // reuse a computed maximum
};

struct PofReport {
  solver::Direction direction = solver::Direction::Maximize;
  double phat = 0.0;
  Scenario scenario;
  std::vector<double> raw;  // encoded witness, usable as a warm start
  double theta = 0.0;
  double m = 0.0;
  SupportShape shape;
  Status status = Status::Ok;
  bool forced_failure = false;
  MarkovCheck markov;
  solver::VerificationRecord verification;
  double residual = 0.0;
  solver::Trace trace;
  std::uint64_t seed = 0;
  int restarts = 0;
  long evaluations = 0;        // outer objective evaluations, all restarts
  long inner_evaluations = 0;  // constraint-solver inner evaluations
  std::string message;
};

/// Best-found maximum (or minimum) of mu[y <= theta] over the reduced
/// feasible set, best of config.restarts independent solves.
PofReport solve(const ProblemSpec& spec, const solver::SolverConfig& config,
                const PofOptions& options = {});

PofReport phat_sup(const ProblemSpec& spec, const solver::SolverConfig& config,
                   const SupportShape& shape = {});
PofReport phat_inf(const ProblemSpec& spec, const solver::SolverConfig& config,
                   const SupportShape& shape = {});

/// Markov maximum and bound for the problem's m and theta.
MarkovCheck markov_check(const ProblemSpec& spec, const solver::SolverConfig& config);

/// Closed-form P^ for one observation (z, Gz) on [0, 1] with constant L.
/// Throws ContractError unless Gz > theta and InfeasibleError when the data,
/// mean and Lipschitz constraints contradict each other.
double phat_1d(double z, double Gz, double L, double m, double theta);

struct SweepEntry {
  PofReport report;
  double markov_bound = 1.0;
  double gap = 0.0;  // markov_bound - phat
};

/// One solve per theta (ascending), sharing a single Markov maximum; solves
/// run concurrently on config.threads.
std::vector<SweepEntry> theta_sweep(const ProblemSpec& spec, const std::vector<double>& thetas,
                                    const solver::SolverConfig& config,
                                    const PofOptions& options = {});

}  // namespace lipuq::pof
