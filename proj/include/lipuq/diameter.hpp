#pragma once

// Optimal upper bounds on McDiarmid subdiameters given legacy data, the
// 4 Gamma error cap, and the McDiarmid failure bound and certificate.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lipuq/core.hpp"
#include "lipuq/solver.hpp"

namespace lipuq::diameter {

struct DiameterReport {
  std::size_t k = 0;
  double dhat_k = 0.0;
  // Maximiser: x and x_prime differ only in coordinate k; |y - y_prime| = dhat_k.
  Point x;
  Point x_prime;
  double y = 0.0;
  double y_prime = 0.0;
  double gamma = 0.0;
  double error_cap = 0.0;  // 4 gamma
  bool non_unique = false;  // distinct near-optimal witnesses in the final population
  solver::Trace trace;
  std::uint64_t seed = 0;
  long evaluations = 0;
};

struct DiameterOptions {
  std::optional<double> gamma;             // skip the gap-size search when known
  std::vector<double> warm_start;          // raw (x, x'^k) member for the first restart
};

/// Best-found maximum of the polygon objective A(x, x') over x in the domain
/// and x'^k in the k-th interval. Throws InfeasibleError for infeasible data.
DiameterReport dhat_k(const ProblemSpec& spec, std::size_t k, const solver::SolverConfig& config,
                      const DiameterOptions& options = {});

/// Every coordinate; the K problems run concurrently on config.threads.
std::vector<DiameterReport> dhat_all(const ProblemSpec& spec, const solver::SolverConfig& config);

/// Root-sum-square of the subdiameter bounds.
double dhat(std::span<const double> dhat_k);

inline double diameter_error_cap(double gamma) { return 4.0 * gamma; }

/// exp(-2 (m - theta)_+^2 / dhat^2), with the limits at dhat = 0.
double mcdiarmid_pof_bound(double m, double theta, double dhat);

/// (m - theta)_+ / dhat >= sqrt(log sqrt(1 / p_star)).
bool certify(double m, double theta, double dhat, double p_star);

/// (1 - m_+ / D)_+ for a single coordinate.
double optimal_mcdiarmid_k1(double m, double D);

}  // namespace lipuq::diameter
