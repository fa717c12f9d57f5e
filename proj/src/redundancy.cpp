#include "lipuq/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipuq/errors.hpp"
#include "parallel.hpp"

namespace lipuq::redundancy {

namespace {

bool in_region(std::span<const double> x, const Region& v) { return v.contains(x); }

// |y - G| <= d_L(x, z) + T + tol
bool feasible_for(const Datum& z, std::span<const double> x, double y, const LipschitzSpec& lip,
                  double tol) {
  return std::abs(y - z.value) <= lip_distance(lip, x, z.x) + lip.tolerance() + tol;
}

// One solve of the chosen objective on a data subset.
struct Solve {
  double value = 0.0;
  std::optional<diameter::DiameterReport> diameter;
  std::optional<pof::PofReport> pof;
  long evaluations = 0;
};

class Runner {
 public:
  Runner(const ProblemSpec& spec, const solver::SolverConfig& config,
         const ActiveSetOptions& options)
      : spec_(spec), config_(config), options_(options) {}

  Solve run(const std::vector<std::size_t>& subset, const Solve* previous, bool scoring,
            const solver::SolverConfig& config) const {
    const auto at = spec_.with_data(spec_.data().subset(subset));
    Solve out;
    if (options_.objective == Objective::Diameter) {
      diameter::DiameterOptions o;
      // The error cap is only reported for the enforced-set solves.
      if (scoring) o.gamma = std::numeric_limits<double>::infinity();
      if (previous && previous->diameter) {
        o.warm_start = previous->diameter->x;
        o.warm_start.push_back(previous->diameter->x_prime[options_.k]);
      }
      auto rep = diameter::dhat_k(at, options_.k, config, o);
      out.value = rep.dhat_k;
      out.evaluations = rep.evaluations;
      out.diameter = std::move(rep);
    } else {
      pof::PofOptions o;
      o.shape = options_.shape;
      if (previous && previous->pof && !previous->pof->raw.empty()) {
        o.warm_start.push_back(previous->pof->raw);
      }
      auto rep = pof::solve(at, config, o);
      out.value = rep.phat;
      out.evaluations = rep.evaluations;
      out.pof = std::move(rep);
    }
    return out;
  }

  bool nonbinding(std::size_t i, const Solve& s) const {
    const Datum z{spec_.data().point(i), spec_.data().value(i)};
    if (s.diameter) return is_nonbinding_diameter(z, *s.diameter, spec_.lip(), config_.short_tol);
    return is_nonbinding_pof(z, s.pof->scenario, spec_.lip(), config_.short_tol);
  }

 private:
  const ProblemSpec& spec_;
  const solver::SolverConfig& config_;
  const ActiveSetOptions& options_;
};

}  // namespace

bool region_within(const Region& v, const BoxDomain& domain) {
  if (v.dim() != domain.dim()) return false;
  for (std::size_t k = 0; k < v.dim(); ++k) {
    if (v[k].lo < domain[k].lo || v[k].hi > domain[k].hi || v[k].lo > v[k].hi) return false;
  }
  return true;
}

Point project(std::span<const double> x, const Region& v) {
  if (x.size() != v.dim()) throw ContractError("project: dimension mismatch");
  return v.clamp(x);
}

bool is_redundant_sufficient(const Datum& z0, const Region& v, const Dataset& data_in_v,
                             const LipschitzSpec& lip) {
  if (z0.x.size() != v.dim() || lip.dim() != v.dim()) {
    throw ContractError("is_redundant_sufficient: dimension mismatch");
  }
  if (in_region(z0.x, v)) {
    throw ContractError("is_redundant_sufficient: z0 lies in V; isolated data in V are relevant");
  }
  if (data_in_v.empty()) throw ContractError("is_redundant_sufficient: no data in V");
  for (std::size_t i = 0; i < data_in_v.size(); ++i) {
    if (!in_region(data_in_v.point(i), v)) {
      throw ContractError("is_redundant_sufficient: datum " + data_in_v.label(i) +
                          " lies outside V");
    }
  }
  const Point p = project(z0.x, v);
  const double d0 = lip_distance(lip, z0.x, p);
  bool above = false;
  bool below = false;
  for (std::size_t i = 0; i < data_in_v.size(); ++i) {
    const double d = lip_distance(lip, data_in_v.point(i), p);
    above = above || data_in_v.value(i) + d <= z0.value + d0;
    below = below || data_in_v.value(i) - d >= z0.value - d0;
  }
  return above && below;
}

bool is_redundant_definitional(const Datum& z0, const Region& v, const Dataset& data,
                               const LipschitzSpec& lip, int grid_resolution) {
  const std::size_t dim = v.dim();
  if (dim > 3) throw ContractError("is_redundant_definitional: oracle supports K <= 3 only");
  if (grid_resolution < 2) throw ContractError("is_redundant_definitional: grid too coarse");
  const double T = lip.tolerance();

  auto holds_at = [&](std::span<const double> x) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double d = lip_distance(lip, x, data.point(i)) + T;
      lo = std::max(lo, data.value(i) - d);
      hi = std::min(hi, data.value(i) + d);
    }
    if (lo > hi) return true;  // nothing feasible here
    const double r = lip_distance(lip, x, z0.x) + T;
    const double slack = 1e-12 * std::max({1.0, std::abs(z0.value), r});
    return lo >= z0.value - r - slack && hi <= z0.value + r + slack;
  };

  if (in_region(z0.x, v) && !holds_at(z0.x)) return false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (in_region(data.point(i), v) && !holds_at(data.point(i))) return false;
  }
  const auto n = static_cast<std::size_t>(grid_resolution);
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= n;
  Point x(dim);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t k = 0; k < dim; ++k) {
      const double t = static_cast<double>(rest % n) / static_cast<double>(n - 1);
      rest /= n;
      x[k] = v[k].lo + t * v[k].width();
    }
    if (!holds_at(x)) return false;
  }
  return true;
}

bool is_nonbinding_diameter(const Datum& z0, const diameter::DiameterReport& maximizer,
                            const LipschitzSpec& lip, double tol) {
  return feasible_for(z0, maximizer.x, maximizer.y, lip, tol) &&
         feasible_for(z0, maximizer.x_prime, maximizer.y_prime, lip, tol);
}

bool is_nonbinding_pof(const Datum& z0, const Scenario& witness, const LipschitzSpec& lip,
                       double tol) {
  for (std::uint32_t eps = 0; eps < witness.vertex_count(); ++eps) {
    if (!feasible_for(z0, witness.vertex(eps), witness.y[eps], lip, tol)) return false;
  }
  return true;
}

ActiveSetResult active_set_solve(const ProblemSpec& spec, const solver::SolverConfig& config,
                                 const ActiveSetOptions& options) {
  config.validate();
  const std::size_t n = spec.data().size();
  if (n == 0) throw ContractError("active_set_solve: the dataset is empty");
  if (options.objective == Objective::Diameter && options.k >= spec.dim()) {
    throw ContractError("active_set_solve: coordinate index out of range");
  }
  const Runner runner(spec, config, options);
  solver::SolverConfig each = config;
  each.threads = 1;
  const int cap = options.max_iterations > 0 ? options.max_iterations : static_cast<int>(n);

  ActiveSetResult out;
  ActiveSetState& state = out.state;
  for (std::size_t i = 0; i < n; ++i) state.candidates.push_back(i);

  Solve current;
  bool have = false;
  while (!state.candidates.empty()) {
    if (state.iteration >= cap) {
      out.terminated = false;
      break;
    }
    ++state.iteration;

    // Score every candidate against the enforced set.
    std::vector<Solve> scores(state.candidates.size());
    detail::parallel_for(scores.size(), config.threads, [&](std::size_t j) {
      std::vector<std::size_t> subset = state.enforced;
      subset.push_back(state.candidates[j]);
      std::sort(subset.begin(), subset.end());
      scores[j] = runner.run(subset, have ? &current : nullptr, true, each);
    });
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : scores) {
      best = std::max(best, s.value);
      out.evaluations += s.evaluations;
      ++out.solves;
    }

    ActiveSetStep step;
    step.iteration = state.iteration;
    // A repeated observation is the same element of the data set: a tied
    // copy of an admitted row is not admitted again.
    auto repeats = [&](std::size_t i) {
      auto same = [&](std::size_t e) {
        return spec.data().value(e) == spec.data().value(i) &&
               spec.data().point(e) == spec.data().point(i);
      };
      return std::any_of(state.enforced.begin(), state.enforced.end(), same) ||
             std::any_of(step.added.begin(), step.added.end(), same);
    };
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j].value < best - config.outer_tol) continue;
      if (repeats(state.candidates[j])) continue;
      step.added.push_back(state.candidates[j]);
      if (options.single_winner) break;
    }
    state.enforced.insert(state.enforced.end(), step.added.begin(), step.added.end());
    std::sort(state.enforced.begin(), state.enforced.end());

    current = runner.run(state.enforced, have ? &current : nullptr, false, config);
    have = true;
    out.evaluations += current.evaluations;
    ++out.solves;
    step.value = current.value;
    state.history.push_back(std::move(step));

    state.candidates.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::binary_search(state.enforced.begin(), state.enforced.end(), i)) continue;
      if (!runner.nonbinding(i, current)) state.candidates.push_back(i);
    }
  }

  out.value = current.value;
  out.diameter = std::move(current.diameter);
  out.pof = std::move(current.pof);
  return out;
}

}  // namespace lipuq::redundancy
