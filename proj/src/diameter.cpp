#include "lipuq/diameter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipuq/envelope.hpp"
#include "lipuq/errors.hpp"
#include "parallel.hpp"

namespace lipuq::diameter {

namespace {

Point with_coordinate(std::span<const double> x, std::size_t k, double v) {
  Point out(x.begin(), x.end());
  out[k] = v;
  return out;
}

}  // namespace

DiameterReport dhat_k(const ProblemSpec& spec, std::size_t k, const solver::SolverConfig& config,
                      const DiameterOptions& options) {
  config.validate();
  const std::size_t dim = spec.dim();
  if (k >= dim) throw ContractError("dhat_k: coordinate index out of range");
  const auto& dom = spec.domain();
  const auto& lip = spec.lip();

  DiameterReport rep;
  rep.k = k;
  rep.seed = config.seed;
  if (spec.data().empty()) {
    // Only the pair constraint binds.
    rep.x = dom.lower_corner();
    rep.x_prime = with_coordinate(rep.x, k, dom[k].hi);
    rep.dhat_k = lip_distance(lip, rep.x, rep.x_prime) + lip.tolerance();
    rep.y_prime = rep.dhat_k;
    rep.gamma = std::numeric_limits<double>::infinity();
    rep.error_cap = rep.gamma;
    return rep;
  }

  rep.gamma = options.gamma ? *options.gamma : envelope::gap_size(spec, config).value.value();
  rep.error_cap = diameter_error_cap(rep.gamma);

  const envelope::Envelope env(spec);
  solver::Box box;
  for (std::size_t j = 0; j < dim; ++j) {
    box.lo.push_back(dom[j].lo);
    box.hi.push_back(dom[j].hi);
  }
  box.lo.push_back(dom[k].lo);
  box.hi.push_back(dom[k].hi);

  solver::Objective a = [&](std::span<const double> v) {
    const auto x = v.first(dim);
    const Point xp = with_coordinate(x, k, v[dim]);
    return envelope::polygon_objective(env, x, xp, k);
  };

  double best = -std::numeric_limits<double>::infinity();
  solver::DeResult winner;
  for (int r = 0; r < config.restarts; ++r) {
    auto opts = solver::outer_options(
        config, solver::derive_seed(config.seed, 0xd1a, k, static_cast<std::uint64_t>(r)));
    if (r == 0 && options.warm_start.size() == dim + 1) {
      opts.initial_members.push_back(options.warm_start);
    }
    auto res = solver::de_optimize(a, box, {}, opts, solver::Direction::Maximize);
    rep.evaluations += res.evaluations;
    if (res.best_value > best) {
      best = res.best_value;
      winner = std::move(res);
    }
  }

  const auto& v = winner.best;
  rep.x.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(dim));
  rep.x_prime = with_coordinate(rep.x, k, v[dim]);
  const auto corner = envelope::polygon_maximizer(env, rep.x, rep.x_prime, k);
  rep.dhat_k = corner.value;
  rep.y = corner.y;
  rep.y_prime = corner.y_prime;
  rep.trace = std::move(winner.trace);

  double scale = 0.0;
  for (std::size_t j = 0; j < dim; ++j) scale = std::max(scale, dom[j].width());
  const double apart = 1e-6 * std::max(scale, 1.0);
  for (const auto& member : winner.population) {
    if (!member.fitness.feasible) continue;
    if (-member.fitness.objective < rep.dhat_k - config.outer_tol) continue;
    double gap = 0.0;
    for (std::size_t j = 0; j < member.vector.size(); ++j) {
      gap = std::max(gap, std::abs(member.vector[j] - v[j]));
    }
    if (gap > apart) {
      rep.non_unique = true;
      break;
    }
  }
  return rep;
}

std::vector<DiameterReport> dhat_all(const ProblemSpec& spec, const solver::SolverConfig& config) {
  config.validate();
  std::optional<double> gamma;
  if (!spec.data().empty()) gamma = envelope::gap_size(spec, config).value.value();
  std::vector<DiameterReport> out(spec.dim());
  solver::SolverConfig each = config;
  each.threads = 1;
  detail::parallel_for(spec.dim(), config.threads, [&](std::size_t k) {
    out[k] = dhat_k(spec, k, each, {gamma, {}});
  });
  return out;
}

double dhat(std::span<const double> dhat_k) {
  double acc = 0.0;
  for (double d : dhat_k) acc += d * d;
  return std::sqrt(acc);
}

double mcdiarmid_pof_bound(double m, double theta, double dhat) {
  const double margin = std::max(0.0, m - theta);
  if (margin == 0.0) return 1.0;
  if (dhat == 0.0) return 0.0;
  return std::exp(-2.0 * margin * margin / (dhat * dhat));
}

bool certify(double m, double theta, double dhat, double p_star) {
  if (!(p_star > 0.0 && p_star <= 1.0)) throw ContractError("certify: p_star must lie in (0, 1]");
  const double margin = std::max(0.0, m - theta);
  if (dhat == 0.0) return margin > 0.0 || p_star == 1.0;
  const double needed = std::sqrt(std::log(std::sqrt(1.0 / p_star)));
  // The boundary case margin/dhat == needed must certify despite rounding.
  return margin / dhat >= needed * (1.0 - 4.0 * std::numeric_limits<double>::epsilon());
}

double optimal_mcdiarmid_k1(double m, double D) {
  const double mp = std::max(0.0, m);
  if (D == 0.0) return mp > 0.0 ? 0.0 : 1.0;
  if (!(D > 0.0)) throw ContractError("optimal_mcdiarmid_k1: D must be non-negative");
  return std::max(0.0, 1.0 - mp / D);
}

}  // namespace lipuq::diameter
