#include "lipuq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "lipuq/errors.hpp"
#include "parallel.hpp"

namespace lipuq::solver {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double user_value(const Fitness& f, Direction d) {
  if (!f.feasible) return std::numeric_limits<double>::quiet_NaN();
  return d == Direction::Maximize ? -f.objective : f.objective;
}

}  // namespace

void SolverConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractError("SolverConfig: " + what); };
  if (outer_npop < 4) fail("outer_npop must be >= 4");
  if (inner_npop < 4) fail("inner_npop must be >= 4");
  if (outer_ngen < 1) fail("outer_ngen must be >= 1");
  if (outer_max_generations < 1) fail("outer_max_generations must be >= 1");
  if (inner_budget < 0) fail("inner_budget must be >= 0");
  if (!(outer_tol >= 0.0)) fail("outer_tol must be >= 0");
  if (!(inner_tol >= 0.0)) fail("inner_tol must be >= 0");
  if (!(short_tol >= 0.0)) fail("short_tol must be >= 0");
  if (!(mean_tol >= 0.0)) fail("mean_tol must be >= 0");
  if (!(de_weight > 0.0 && de_weight < 2.0)) fail("de_weight must lie in (0, 2)");
  if (!(de_crossover >= 0.0 && de_crossover <= 1.0)) fail("de_crossover must lie in [0, 1]");
  if (restarts < 1) fail("restarts must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (c * 0x85157af5ULL));
  return h;
}

bool better(const Fitness& a, const Fitness& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.feasible) return a.objective < b.objective;
  return a.residual < b.residual;
}

Termination Termination::change_over_generations(double tol, int ngen) {
  if (ngen < 1 || !(tol >= 0.0)) throw ContractError("ChangeOverGenerations: bad parameters");
  Termination t;
  t.kind_ = Kind::ChangeOverGenerations;
  t.tol_ = tol;
  t.ngen_ = ngen;
  return t;
}

Termination Termination::value_to_reach(double target, double tol) {
  if (!(tol >= 0.0)) throw ContractError("ValueToReach: bad tolerance");
  Termination t;
  t.kind_ = Kind::ValueToReach;
  t.tol_ = tol;
  t.target_ = target;
  return t;
}

bool Termination::satisfied(std::span<const Fitness> history) const {
  if (history.empty()) return false;
  const Fitness& last = history.back();
  if (kind_ == Kind::ValueToReach) return last.feasible && last.objective <= target_ + tol_;

  if (history.size() <= static_cast<std::size_t>(ngen_)) return false;
  const Fitness& old = history[history.size() - 1 - static_cast<std::size_t>(ngen_)];
  if (old.feasible != last.feasible) return false;
  const double improvement =
      last.feasible ? old.objective - last.objective : old.residual - last.residual;
  return improvement <= tol_;
}

Evaluator compose(Objective objective, Chain chain, Direction direction) {
  const double sign = direction == Direction::Maximize ? -1.0 : 1.0;
  return [objective = std::move(objective), chain = std::move(chain), sign](
             std::vector<double> raw, std::uint64_t stream) {
    Evaluation ev;
    if (chain) {
      ChainOutput out = chain(std::move(raw), stream);
      ev.vector = std::move(out.vector);
      ev.fitness.residual = out.residual;
      ev.fitness.feasible = out.feasible;
      ev.inner_evaluations = out.evaluations;
    } else {
      ev.vector = std::move(raw);
    }
    ev.fitness.objective = sign * objective(ev.vector);
    return ev;
  };
}

void Trace::write_csv(std::ostream& os) const {
  os << "generation,best_value,feasibility_residual\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& r : rows) {
    line.str({});
    line << r.generation << ',' << r.best_value << ',' << r.residual << '\n';
    os << line.str();
  }
}

DeOptions outer_options(const SolverConfig& config, std::uint64_t seed) {
  DeOptions o;
  o.npop = config.outer_npop;
  o.weight = config.de_weight;
  o.crossover = config.de_crossover;
  o.max_generations = config.outer_max_generations;
  o.seed = seed;
  o.threads = config.threads;
  o.termination = Termination::change_over_generations(config.outer_tol, config.outer_ngen);
  return o;
}

DeResult de_optimize(const Evaluator& evaluate, const Box& bounds, const DeOptions& options,
                     Direction direction) {
  const std::size_t dim = bounds.size();
  const std::size_t npop = static_cast<std::size_t>(options.npop);
  if (options.npop < 4) throw ContractError("de_optimize: population must be >= 4");
  if (bounds.hi.size() != dim) throw ContractError("de_optimize: bounds size mismatch");
  for (std::size_t j = 0; j < dim; ++j) {
    if (!std::isfinite(bounds.lo[j]) || !std::isfinite(bounds.hi[j]) || bounds.lo[j] > bounds.hi[j]) {
      throw ContractError("de_optimize: bounds must be finite with lo <= hi");
    }
  }

  DeResult result;
  std::vector<Evaluation> pop(npop);
  std::vector<Fitness> history;

  auto record = [&](long generation, const Evaluation& best) {
    history.push_back(best.fitness);
    result.trace.rows.push_back(
        {generation, user_value(best.fitness, direction), best.fitness.residual});
  };
  auto finish = [&](const Evaluation& best, int generations, std::string reason) {
    result.best = best.vector;
    result.best_fitness = best.fitness;
    result.best_value = user_value(best.fitness, direction);
    result.generations = generations;
    result.stop_reason = std::move(reason);
    result.population = pop;
    return result;
  };

  auto initial_member = [&](std::size_t i) {
    if (i < options.initial_members.size() && options.initial_members[i].size() == dim) {
      auto v = options.initial_members[i];
      for (std::size_t j = 0; j < dim; ++j) v[j] = std::clamp(v[j], bounds.lo[j], bounds.hi[j]);
      return v;
    }
    std::mt19937_64 rng(derive_seed(options.seed, 0, i, 1));
    std::vector<double> v(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      v[j] = std::uniform_real_distribution<double>(bounds.lo[j], bounds.hi[j])(rng);
    }
    return v;
  };

  // A value-to-reach solve stops as soon as any initial member reaches the
  // target, so a warm-start member that already satisfies it costs one call.
  const bool vtr = options.termination.kind() == Termination::Kind::ValueToReach;
  if (vtr) {
    for (std::size_t i = 0; i < npop; ++i) {
      pop[i] = evaluate(initial_member(i), derive_seed(options.seed, 0, i, 2));
      ++result.evaluations;
      result.inner_evaluations += pop[i].inner_evaluations;
      std::vector<Fitness> probe{pop[i].fitness};
      if (options.termination.satisfied(probe)) {
        pop.resize(i + 1);
        record(0, pop[i]);
        return finish(pop[i], 0, "value_to_reach");
      }
    }
  } else {
    detail::parallel_for(npop, options.threads, [&](std::size_t i) {
      pop[i] = evaluate(initial_member(i), derive_seed(options.seed, 0, i, 2));
    });
    result.evaluations += static_cast<long>(npop);
    for (const auto& e : pop) result.inner_evaluations += e.inner_evaluations;
  }

  auto best_index = [&] {
    std::size_t b = 0;
    for (std::size_t i = 1; i < npop; ++i) {
      if (better(pop[i].fitness, pop[b].fitness)) b = i;
    }
    return b;
  };

  std::size_t best = best_index();
  record(0, pop[best]);

  std::vector<Evaluation> trials(npop);
  int generation = 0;
  std::string reason = "max_generations";
  while (true) {
    if (options.termination.satisfied(history)) {
      reason = vtr ? "value_to_reach" : "change_over_generations";
      break;
    }
    if (generation >= options.max_generations) break;
    ++generation;

    detail::parallel_for(npop, options.threads, [&](std::size_t i) {
      std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(generation), i, 3));
      std::uniform_int_distribution<std::size_t> pick(0, npop - 1);
      std::size_t r1, r2, r3;
      do r1 = pick(rng); while (r1 == i);
      do r2 = pick(rng); while (r2 == i || r2 == r1);
      do r3 = pick(rng); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t jrand = std::uniform_int_distribution<std::size_t>(0, dim - 1)(rng);
      std::uniform_real_distribution<double> unit(0.0, 1.0);

      const auto& target = pop[i].vector;
      std::vector<double> trial(target);
      for (std::size_t j = 0; j < dim; ++j) {
        if (j == jrand || unit(rng) < options.crossover) {
          const double v =
              pop[r1].vector[j] + options.weight * (pop[r2].vector[j] - pop[r3].vector[j]);
          trial[j] = std::clamp(v, bounds.lo[j], bounds.hi[j]);
        }
      }
      trials[i] = evaluate(std::move(trial),
                           derive_seed(options.seed, static_cast<std::uint64_t>(generation), i, 4));
    });
    result.evaluations += static_cast<long>(npop);

    for (std::size_t i = 0; i < npop; ++i) {
      result.inner_evaluations += trials[i].inner_evaluations;
      if (!better(pop[i].fitness, trials[i].fitness)) pop[i] = std::move(trials[i]);
    }
    best = best_index();
    record(generation, pop[best]);
  }

  return finish(pop[best], generation, reason);
}

DeResult de_optimize(const Objective& objective, const Box& bounds, const Chain& chain,
                     const DeOptions& options, Direction direction) {
  return de_optimize(compose(objective, chain, direction), bounds, options, direction);
}

}  // namespace lipuq::solver
