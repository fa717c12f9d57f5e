#include "lipuq/pof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipuq/envelope.hpp"
#include "lipuq/errors.hpp"
#include "parallel.hpp"

namespace lipuq::pof {

namespace {

bool pins_failure(const solver::SolverConfig& config, std::size_t dim, solver::Direction d) {
  if (d != solver::Direction::Maximize) return false;
  switch (config.forced_failure) {
    case solver::ForcedFailure::On:
      return true;
    case solver::ForcedFailure::Off:
      return false;
    case solver::ForcedFailure::Auto:
      break;
  }
  return dim == 1;
}

// Single atom at x0 = x1 with every weight on x0.
Scenario single_atom(const Point& x, double y, const SupportShape& shape) {
  Scenario s;
  s.x0 = x;
  s.x1 = x;
  s.p.assign(x.size(), 1.0);
  s.y.assign(CubeIndex::count(x.size()), y);
  s.shape = shape;
  return s;
}

// When theta >= m, a point where [max(Y-, m), min(Y+, theta)] is non-empty
// supports a scenario in which every atom fails.
std::optional<Scenario> all_fail_seed(const ProblemSpec& spec, const solver::SolverConfig& config,
                                      const MarkovCheck& markov, const SupportShape& shape) {
  const double m = spec.mean_lower_bound();
  const double theta = spec.theta();
  if (theta < m) return std::nullopt;
  const envelope::Envelope env(spec);
  auto slack = [&](std::span<const double> x) {
    return std::min(env.upper_value(x) - m, theta - env.lower_value(x));
  };
  Point best = markov.argmax;
  if (best.empty() || slack(best) < 0.0) {
    solver::Box box;
    for (const auto& iv : spec.domain().bounds()) {
      box.lo.push_back(iv.lo);
      box.hi.push_back(iv.hi);
    }
    auto opts = solver::outer_options(config, solver::derive_seed(config.seed, 0xa11));
    opts.termination = solver::Termination::value_to_reach(0.0, 0.0);
    solver::Objective f = [&](std::span<const double> x) { return -slack(x); };
    auto res = solver::de_optimize(f, box, {}, opts, solver::Direction::Minimize);
    best = res.best;
    if (slack(best) < 0.0) return std::nullopt;
  }
  const double y = std::max(m, env.lower_value(best));
  return single_atom(best, y, shape);
}

// Two atoms along one coordinate: y = M at the Markov maximiser and y = theta
// at distance M - theta - T from it. Attains the Markov bound when the data
// allow it.
std::vector<Scenario> markov_seeds(const ProblemSpec& spec, const MarkovCheck& markov,
                                   const SupportShape& shape) {
  std::vector<Scenario> out;
  const double m = spec.mean_lower_bound();
  const double theta = spec.theta();
  const double M = markov.M;
  if (theta >= m || M <= m || markov.argmax.empty()) return out;
  const auto& lip = spec.lip();
  const double reach = M - theta - lip.tolerance();
  if (reach < 0.0) return out;
  const envelope::Envelope env(spec);
  const std::size_t dim = spec.dim();
  for (std::size_t k = 0; k < dim; ++k) {
    if (shape[k] != 2 || lip[k] == 0.0) continue;
    for (double dir : {-1.0, 1.0}) {
      Point xf = markov.argmax;
      xf[k] += dir * reach / lip[k];
      if (xf[k] < spec.domain()[k].lo || xf[k] > spec.domain()[k].hi) continue;
      if (env.lower_value(xf) > theta || env.upper_value(xf) < theta) continue;
      Scenario s = single_atom(markov.argmax, M, shape);
      s.x1 = xf;
      // A hair above the exact weight, so rounding cannot push E[y] below m
      // and make the mean shift lift the failing atom over theta.
      s.p[k] = std::min(1.0, (m - theta) / (M - theta) + 1e-12);
      for (std::uint32_t eps = 0; eps < s.y.size(); ++eps) {
        if (CubeIndex(dim, eps).bit(k)) s.y[eps] = theta;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Ok:
      return "ok";
    case Status::NoFeasibleFailure:
      return "no_feasible_failure";
    case Status::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

MarkovCheck markov_check(const ProblemSpec& spec, const solver::SolverConfig& config) {
  MarkovCheck mc;
  auto mm = envelope::markov_max(spec, config);
  mc.M = mm.search.value.value();
  mc.argmax = mm.search.argmax;
  const auto b = envelope::markov_bound(mc.M, spec.mean_lower_bound(), spec.theta());
  mc.bound = b.value;
  mc.vacuous = b.vacuous;
  return mc;
}

PofReport solve(const ProblemSpec& spec, const solver::SolverConfig& config,
                const PofOptions& options) {
  config.validate();
  const std::size_t dim = spec.dim();
  const SupportShape shape = options.shape.empty() ? full_support(dim) : options.shape;
  const solver::ScenarioCodec codec(spec, shape, config.short_tol);
  const bool pin = pins_failure(config, dim, options.direction);
  const solver::ConstraintChain chain(spec, codec, config, pin);
  const double theta = spec.theta();

  PofReport rep;
  rep.direction = options.direction;
  rep.theta = theta;
  rep.m = spec.mean_lower_bound();
  rep.shape = shape;
  rep.forced_failure = pin;
  rep.seed = config.seed;
  rep.restarts = config.restarts;
  if (options.markov) {
    rep.markov = *options.markov;
    const auto b = envelope::markov_bound(rep.markov.M, rep.m, theta);
    rep.markov.bound = b.value;
    rep.markov.vacuous = b.vacuous;
  } else {
    rep.markov = markov_check(spec, config);
  }

  const double sign = options.direction == solver::Direction::Maximize ? -1.0 : 1.0;
  solver::Evaluator evaluate = [&](std::vector<double> raw, std::uint64_t stream) {
    auto r = chain.apply(raw, stream);
    solver::Evaluation ev;
    ev.fitness.objective = sign * failure_probability(r.scenario, theta);
    ev.fitness.residual = r.residual;
    ev.fitness.feasible = r.feasible;
    ev.inner_evaluations = r.inner_evaluations;
    ev.vector = codec.encode(r.scenario);
    return ev;
  };

  std::vector<std::vector<double>> seeds = options.warm_start;
  if (options.direction == solver::Direction::Maximize) {
    if (auto s = all_fail_seed(spec, config, rep.markov, shape)) seeds.push_back(codec.encode(*s));
    if (!pin) {
      for (const auto& s : markov_seeds(spec, rep.markov, shape)) seeds.push_back(codec.encode(s));
    }
  }

  solver::DeResult winner;
  bool have = false;
  for (int r = 0; r < config.restarts; ++r) {
    auto opts = solver::outer_options(
        config, solver::derive_seed(config.seed, 0x9f0, static_cast<std::uint64_t>(r)));
    opts.initial_members = seeds;
    auto res = solver::de_optimize(evaluate, codec.bounds(), opts, options.direction);
    rep.evaluations += res.evaluations;
    rep.inner_evaluations += res.inner_evaluations;
    if (!have || solver::better(res.best_fitness, winner.best_fitness)) {
      winner = std::move(res);
      have = true;
    }
  }
  rep.trace = std::move(winner.trace);

  if (winner.best_fitness.feasible) {
    rep.raw = winner.best;
    rep.scenario = codec.decode_exact(rep.raw);
    rep.phat = failure_probability(rep.scenario, theta);
    rep.residual = winner.best_fitness.residual;
    rep.status = Status::Ok;
  } else if (pin && rep.markov.M >= rep.m - config.mean_tol) {
    // Every restart failed to place a feasible failing atom: no admissible
    // scenario can fail, so P^ = 0, witnessed by one atom at the Markov maximiser.
    rep.scenario = single_atom(rep.markov.argmax, rep.markov.M, shape);
    rep.raw = codec.encode(rep.scenario);
    rep.phat = failure_probability(rep.scenario, theta);
    rep.residual = winner.best_fitness.residual;
    rep.status = Status::NoFeasibleFailure;
    rep.message = "no feasible scenario with a failing atom; P^ = 0";
  } else {
    rep.raw = winner.best;
    rep.scenario = codec.decode_exact(rep.raw);
    rep.phat = options.direction == solver::Direction::Maximize ? 0.0 : 1.0;
    rep.residual = winner.best_fitness.residual;
    rep.status = Status::Infeasible;
    std::ostringstream os;
    os << "no admissible scenario found after " << config.restarts
       << " restarts; best constraint residual " << rep.residual;
    if (rep.markov.M < rep.m) os << "; the mean bound exceeds the Markov maximum " << rep.markov.M;
    rep.message = os.str();
  }

  rep.verification = solver::verify(rep.scenario, spec, config,
                                    rep.status == Status::Infeasible ? std::nullopt
                                                                     : std::optional(rep.phat));
  return rep;
}

PofReport phat_sup(const ProblemSpec& spec, const solver::SolverConfig& config,
                   const SupportShape& shape) {
  PofOptions o;
  o.shape = shape;
  return solve(spec, config, o);
}

PofReport phat_inf(const ProblemSpec& spec, const solver::SolverConfig& config,
                   const SupportShape& shape) {
  PofOptions o;
  o.direction = solver::Direction::Minimize;
  o.shape = shape;
  return solve(spec, config, o);
}

double phat_1d(double z, double Gz, double L, double m, double theta) {
  if (!(z >= 0.0 && z <= 1.0)) throw ContractError("phat_1d: z must lie in [0, 1]");
  if (!(L > 0.0)) throw ContractError("phat_1d: L must be positive");
  if (!(Gz > theta)) throw ContractError("phat_1d: requires G(z) > theta");
  double G = Gz - theta;
  const double mm = m - theta;
  if (z > 0.5) z = 1.0 - z;
  if (std::abs(G - mm) > L * std::abs(1.0 - z)) {
    throw InfeasibleError("phat_1d: data, mean and Lipschitz constraints are contradictory");
  }
  const double mp = std::max(0.0, mm);
  auto pos = [](double v) { return std::max(0.0, v); };

  // The last case overlaps the fourth; failure is impossible there, so it is
  // tested first.
  if (G > L * std::abs(1.0 - z)) return 0.0;
  if (G <= L * z) return pos(1.0 - mp / (L - (L * z - G)));
  // Failing at 1 with the success atom inside beats the second case as soon
  // as G > L (1 - z) / 3, below the usual |1/2 - z| threshold.
  if (G <= L * (1.0 - z) / 3.0) return pos(1.0 - mp / (L - (L * z + G)));
  if (G <= L * std::abs(1.0 - 3.0 * z)) return pos(1.0 - 2.0 * mp / (L + (G - L * z)));
  return pos(1.0 - mp / (L * z + G));
}

std::vector<SweepEntry> theta_sweep(const ProblemSpec& spec, const std::vector<double>& thetas,
                                    const solver::SolverConfig& config,
                                    const PofOptions& options) {
  config.validate();
  if (!std::is_sorted(thetas.begin(), thetas.end())) {
    throw ContractError("theta_sweep: thetas must be sorted ascending");
  }
  PofOptions shared = options;
  if (!shared.markov) shared.markov = markov_check(spec, config);

  std::vector<SweepEntry> out(thetas.size());
  solver::SolverConfig each = config;
  each.threads = 1;
  detail::parallel_for(thetas.size(), config.threads, [&](std::size_t i) {
    const auto at = spec.with_theta(thetas[i]);
    out[i].report = solve(at, each, shared);
    out[i].markov_bound = out[i].report.markov.bound;
    out[i].gap = out[i].markov_bound - out[i].report.phat;
  });
  return out;
}

}  // namespace lipuq::pof
