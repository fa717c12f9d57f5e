#include "lipuq/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipuq/envelope.hpp"
#include "lipuq/errors.hpp"

namespace lipuq::solver {

namespace {

constexpr double kRawPLo = -0.1;
constexpr double kRawPHi = 1.1;

std::uint32_t coord_bit(std::size_t dim, std::size_t k) {
  return std::uint32_t{1} << (dim - 1 - k);
}

// Every pair (a, b), a < b, whose constraint is enforced.
template <class Fn>
void for_each_cube_pair(std::size_t dim, bool all_pairs, Fn&& fn) {
  const std::uint32_t n = static_cast<std::uint32_t>(CubeIndex::count(dim));
  if (all_pairs) {
    for (std::uint32_t a = 0; a < n; ++a) {
      for (std::uint32_t b = a + 1; b < n; ++b) fn(a, b);
    }
    return;
  }
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < dim; ++k) {
      const std::uint32_t b = a | coord_bit(dim, k);
      if (b != a) fn(a, b);
    }
  }
}

double mean_shortfall(const Scenario& s, double m, double mean_tol) {
  return std::max(0.0, m - mean_value(s) - mean_tol);
}

}  // namespace

// ---------------------------------------------------------------------------
// Codec

ScenarioCodec::ScenarioCodec(const ProblemSpec& spec, SupportShape shape, double y_slack)
    : spec_(&spec), shape_(std::move(shape)) {
  const std::size_t dim = spec.dim();
  if (shape_.empty()) shape_ = full_support(dim);
  check_support_shape(shape_, dim);
  if (dim > kMaxCubeDim) throw ContractError("scenario dimension exceeds the cube limit");
  if (spec.data().empty()) {
    throw ContractError("probability bounds need at least one observation to bound y");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (shape_[k] == 2) {
      full_.push_back(k);
      full_mask_ |= coord_bit(dim, k);
    }
  }
  const std::uint32_t n = static_cast<std::uint32_t>(CubeIndex::count(dim));
  for (std::uint32_t e = 0; e < n; ++e) {
    if ((e & ~full_mask_) == 0) reps_.push_back(e);
  }

  const auto& dom = spec.domain();
  for (std::size_t k = 0; k < dim; ++k) {
    bounds_.lo.push_back(dom[k].lo);
    bounds_.hi.push_back(dom[k].hi);
  }
  for (std::size_t k : full_) {
    bounds_.lo.push_back(dom[k].lo);
    bounds_.hi.push_back(dom[k].hi);
  }
  for (std::size_t i = 0; i < full_.size(); ++i) {
    bounds_.lo.push_back(kRawPLo);
    bounds_.hi.push_back(kRawPHi);
  }

  // Every envelope value lies in [max_z G - T - R(z), min_z G + T + R(z)],
  // R(z) the largest distance from z to the box.
  const auto& data = spec.data();
  const double T = spec.lip().tolerance();
  double ylo = -std::numeric_limits<double>::infinity();
  double yhi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = max_distance_in_box(spec.lip(), dom, data.point(i));
    ylo = std::max(ylo, data.value(i) - T - r);
    yhi = std::min(yhi, data.value(i) + T + r);
  }
  for (std::size_t i = 0; i < reps_.size(); ++i) {
    bounds_.lo.push_back(ylo - y_slack);
    bounds_.hi.push_back(yhi + y_slack);
  }
}

Scenario ScenarioCodec::decode(std::span<const double> raw) const {
  if (raw.size() != size()) throw ContractError("ScenarioCodec::decode: raw vector size mismatch");
  const std::size_t dim = this->dim();
  Scenario s;
  s.shape = shape_;
  s.x0.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(dim));
  s.x1 = s.x0;
  s.p.assign(dim, 1.0);
  std::size_t at = dim;
  for (std::size_t k : full_) s.x1[k] = raw[at++];
  for (std::size_t k : full_) s.p[k] = raw[at++];

  envelope::Envelope env(*spec_);
  s.y.assign(CubeIndex::count(dim), 0.0);
  for (std::uint32_t r : reps_) {
    const Point x = s.vertex(r);
    const double lo = env.lower_value(x), hi = env.upper_value(x);
    s.y[r] = std::clamp(raw[at++], std::min(lo, hi), hi);
  }
  spread(s);
  return s;
}

Scenario ScenarioCodec::decode_exact(std::span<const double> raw) const {
  if (raw.size() != size()) throw ContractError("ScenarioCodec::decode_exact: raw vector size mismatch");
  const std::size_t dim = this->dim();
  Scenario s;
  s.shape = shape_;
  s.x0.assign(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(dim));
  s.x1 = s.x0;
  s.p.assign(dim, 1.0);
  std::size_t at = dim;
  for (std::size_t k : full_) s.x1[k] = raw[at++];
  for (std::size_t k : full_) s.p[k] = raw[at++];
  s.y.assign(CubeIndex::count(dim), 0.0);
  for (std::uint32_t r : reps_) s.y[r] = raw[at++];
  spread(s);
  return s;
}

std::vector<double> ScenarioCodec::encode(const Scenario& s) const {
  if (s.dim() != dim() || s.y.size() != CubeIndex::count(dim())) {
    throw ContractError("ScenarioCodec::encode: scenario does not match the codec");
  }
  std::vector<double> raw(s.x0.begin(), s.x0.end());
  for (std::size_t k : full_) raw.push_back(s.x1[k]);
  for (std::size_t k : full_) raw.push_back(s.p[k]);
  for (std::uint32_t r : reps_) raw.push_back(s.y[r]);
  return raw;
}

void ScenarioCodec::spread(Scenario& s) const {
  for (std::size_t e = 0; e < s.y.size(); ++e) {
    s.y[e] = s.y[representative_of(static_cast<std::uint32_t>(e))];
  }
}

// ---------------------------------------------------------------------------
// C' and C''

Scenario normalize_weights(Scenario s) {
  for (double& pk : s.p) pk = std::clamp(pk, 0.0, 1.0);
  return s;
}

Scenario impose_mean(Scenario s, double m, std::optional<std::uint32_t> pinned) {
  const double e = mean_value(s);
  if (e >= m) return s;
  if (!pinned) {
    const double shift = m - e;
    for (double& y : s.y) y += shift;
    return s;
  }
  const double free_mass = 1.0 - s.weight(*pinned);
  if (free_mass <= 0.0) return s;
  const double shift = (m - e) / free_mass;
  for (std::size_t i = 0; i < s.y.size(); ++i) {
    if (i != *pinned) s.y[i] += shift;
  }
  return s;
}

// ---------------------------------------------------------------------------
// C

bool needs_all_pairs(const LipschitzSpec& lip) { return lip.tolerance() > 0.0; }

double shortness_residual(const Scenario& s, const Dataset& data, const LipschitzSpec& lip,
                          double short_tol, bool all_pairs) {
  const double T = lip.tolerance();
  const auto verts = s.vertices();
  double acc = 0.0;
  for_each_cube_pair(s.dim(), all_pairs, [&](std::uint32_t a, std::uint32_t b) {
    const double dist = std::abs(s.y[a] - s.y[b]) - lip_distance(lip, verts[a], verts[b]) - T;
    acc += std::max(0.0, dist - short_tol);
  });
  for (std::size_t e = 0; e < verts.size(); ++e) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double dist =
          std::abs(s.y[e] - data.value(i)) - lip_distance(lip, verts[e], data.point(i)) - T;
      acc += std::max(0.0, dist - short_tol);
    }
  }
  return acc;
}

namespace {

struct Projection {
  Scenario scenario;
  double infeasibility = 0.0;  // > 0 when provably infeasible for these positions
};

// Sequential clamp of each representative into the interval left by the data
// and the values fixed before it, then a convex move toward the upper
// envelope of data and pinned atom to restore the mean. Both steps keep
// every shortness constraint, so the result is feasible whenever any y is.
Projection project(Scenario s, const ProblemSpec& spec, const ScenarioCodec& codec,
                   std::optional<std::uint32_t> pinned) {
  const auto& lip = spec.lip();
  const double T = lip.tolerance();
  envelope::Envelope env(spec);
  Projection out;

  std::vector<std::uint32_t> order;
  if (pinned) order.push_back(*pinned);
  for (std::uint32_t r : codec.representatives()) {
    if (!pinned || r != *pinned) order.push_back(r);
  }

  std::vector<Point> pos(order.size());
  std::vector<double> upper(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    pos[i] = s.vertex(order[i]);
    double lo = env.lower_value(pos[i]);
    double hi = env.upper_value(pos[i]);
    upper[i] = hi;
    for (std::size_t j = 0; j < i; ++j) {
      const double d = lip_distance(lip, pos[i], pos[j]) + T;
      const double v = s.y[order[j]];
      lo = std::max(lo, v - d);
      hi = std::min(hi, v + d);
    }
    double& y = s.y[order[i]];
    if (pinned && i == 0) {
      if (y < lo) out.infeasibility += lo - y;
      if (y > hi) out.infeasibility += y - hi;
    }
    y = std::clamp(y, std::min(lo, hi), hi);
  }
  codec.spread(s);

  const double m = spec.mean_lower_bound();
  const double e = mean_value(s);
  if (e < m) {
    std::vector<double> cap(s.y.size(), 0.0);
    for (std::size_t i = 0; i < order.size(); ++i) {
      double u = upper[i];
      if (pinned && i > 0) u = std::min(u, s.y[*pinned] + lip_distance(lip, pos[i], pos[0]) + T);
      cap[order[i]] = (pinned && i == 0) ? s.y[order[i]] : u;
    }
    Scenario capped = s;
    capped.y = cap;
    codec.spread(capped);
    const double e_cap = mean_value(capped);
    if (e_cap < m) {
      out.infeasibility += m - e_cap;
    } else {
      const double lambda = e_cap > e ? std::min(1.0, (m - e) / (e_cap - e)) : 1.0;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (pinned && i == 0) continue;
        double& y = s.y[order[i]];
        y += lambda * (capped.y[order[i]] - y);
      }
      codec.spread(s);
    }
  }
  out.scenario = std::move(s);
  return out;
}

}  // namespace

ShortnessResult impose_shortness(Scenario s, const ProblemSpec& spec, const ScenarioCodec& codec,
                                 const SolverConfig& config, const ShortnessOptions& options) {
  const auto& lip = spec.lip();
  const bool all_pairs = needs_all_pairs(lip);
  const double m = spec.mean_lower_bound();
  auto residual_of = [&](const Scenario& c) {
    return shortness_residual(c, spec.data(), lip, config.short_tol, all_pairs) +
           mean_shortfall(c, m, config.mean_tol);
  };

  ShortnessResult result;
  auto proj = project(std::move(s), spec, codec, options.pinned);
  result.evaluations = 1;
  if (proj.infeasibility > 0.0) {
    result.scenario = std::move(proj.scenario);
    result.residual = proj.infeasibility;
    result.feasible = false;
    result.provably_infeasible = true;
    return result;
  }
  const double r0 = residual_of(proj.scenario);
  if (r0 <= config.inner_tol || config.inner_budget == 0) {
    result.scenario = std::move(proj.scenario);
    result.residual = r0;
    result.feasible = r0 <= config.inner_tol;
    return result;
  }

  // Inner loop over y (and optionally positions), seeded with the projection.
  const std::size_t dim = codec.dim();
  const auto& reps = codec.representatives();
  const auto& full = codec.full_coordinates();
  const bool move_x = config.inner_adjust_positions;
  const std::size_t y_at = move_x ? dim + full.size() : 0;
  const auto& outer_box = codec.bounds();
  const std::size_t outer_y_at = dim + 2 * full.size();

  Box box;
  std::vector<double> seed_member;
  if (move_x) {
    for (std::size_t j = 0; j < dim + full.size(); ++j) {
      box.lo.push_back(outer_box.lo[j]);
      box.hi.push_back(outer_box.hi[j]);
    }
    seed_member.insert(seed_member.end(), proj.scenario.x0.begin(), proj.scenario.x0.end());
    for (std::size_t k : full) seed_member.push_back(proj.scenario.x1[k]);
  }
  envelope::Envelope env(spec);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (move_x) {
      box.lo.push_back(outer_box.lo[outer_y_at + i]);
      box.hi.push_back(outer_box.hi[outer_y_at + i]);
    } else {
      const Point x = proj.scenario.vertex(reps[i]);
      const double lo = env.lower_value(x) - config.short_tol;
      const double hi = env.upper_value(x) + config.short_tol;
      box.lo.push_back(std::min(lo, hi));
      box.hi.push_back(hi);
    }
    seed_member.push_back(proj.scenario.y[reps[i]]);
  }

  const Scenario base = proj.scenario;
  auto build = [&](std::span<const double> v) {
    Scenario c = base;
    if (move_x) {
      for (std::size_t k = 0; k < dim; ++k) c.x0[k] = v[k];
      c.x1 = c.x0;
      for (std::size_t j = 0; j < full.size(); ++j) c.x1[full[j]] = v[dim + j];
    }
    for (std::size_t i = 0; i < reps.size(); ++i) c.y[reps[i]] = v[y_at + i];
    if (options.pinned) c.y[*options.pinned] = base.y[*options.pinned];
    c = impose_mean(normalize_weights(std::move(c)), m, options.pinned);
    codec.spread(c);
    return c;
  };

  Evaluator inner = [&](std::vector<double> raw, std::uint64_t) {
    Evaluation ev;
    ev.fitness.objective = residual_of(build(raw));
    ev.vector = std::move(raw);
    return ev;
  };
  DeOptions opts;
  opts.npop = config.inner_npop;
  opts.weight = config.de_weight;
  opts.crossover = config.de_crossover;
  opts.max_generations = config.inner_budget;
  opts.seed = options.stream;
  opts.threads = 1;
  opts.termination = Termination::value_to_reach(0.0, config.inner_tol);
  opts.initial_members.push_back(seed_member);
  auto res = de_optimize(inner, box, opts, Direction::Minimize);

  result.scenario = build(res.best);
  result.residual = res.best_fitness.objective;
  result.feasible = result.residual <= config.inner_tol;
  result.evaluations += res.evaluations;
  return result;
}

ShortnessResult impose_shortness(Scenario s, const ProblemSpec& spec, const SolverConfig& config,
                                 const ShortnessOptions& options) {
  const ScenarioCodec codec(spec, s.shape, config.short_tol);
  return impose_shortness(std::move(s), spec, codec, config, options);
}

// ---------------------------------------------------------------------------
// Chain

ConstraintChain::ConstraintChain(const ProblemSpec& spec, const ScenarioCodec& codec,
                                 const SolverConfig& config, bool pin_failure)
    : spec_(&spec), codec_(&codec), config_(&config), pin_(pin_failure) {}

ChainResult ConstraintChain::apply(std::span<const double> raw, std::uint64_t stream) const {
  Scenario s = normalize_weights(codec_->decode(raw));
  std::optional<std::uint32_t> pinned;
  if (pin_) {
    pinned = codec_->pinned_vertex();
    s.y[*pinned] = spec_->theta();
  }
  s = impose_mean(std::move(s), spec_->mean_lower_bound(), pinned);
  codec_->spread(s);
  auto r = impose_shortness(std::move(s), *spec_, *codec_, *config_, {pinned, stream});
  return {std::move(r.scenario), r.residual, r.feasible, r.evaluations};
}

// ---------------------------------------------------------------------------
// Verifier

VerificationRecord verify(const Scenario& s, const ProblemSpec& spec, const SolverConfig& config,
                          std::optional<double> claimed_objective) {
  VerificationRecord rec;
  auto fail = [&](std::string what) {
    rec.valid = false;
    rec.violations.push_back(std::move(what));
  };
  try {
    s.check_invariants();
  } catch (const Error& e) {
    fail(std::string("invariants: ") + e.what());
    return rec;
  }
  if (s.dim() != spec.dim()) {
    fail("dimension: scenario and problem differ");
    return rec;
  }

  const std::size_t dim = s.dim();
  const auto verts = s.vertices();
  for (const auto& x : {s.x0, s.x1}) {
    if (!spec.domain().contains(x, 1e-12)) fail("domain: a cube corner lies outside the domain");
  }

  double wsum = 0.0;
  for (std::size_t e = 0; e < verts.size(); ++e) {
    const double w = s.weight(static_cast<std::uint32_t>(e));
    if (w < 0.0 || w > 1.0) fail("weights: w(" + CubeIndex(dim, static_cast<std::uint32_t>(e)).str() + ") outside [0, 1]");
    wsum += w;
  }
  rec.weight_sum = wsum;
  if (std::abs(wsum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "weights: sum is " << wsum;
    fail(os.str());
  }

  rec.mean = mean_value(s);
  rec.mean_slack = rec.mean - spec.mean_lower_bound();
  if (rec.mean_slack < -config.mean_tol) {
    std::ostringstream os;
    os.precision(17);
    os << "mean: E[y] = " << rec.mean << " is below m = " << spec.mean_lower_bound();
    fail(os.str());
  }

  const auto& lip = spec.lip();
  const double T = lip.tolerance();
  rec.max_scenario_violation = -std::numeric_limits<double>::infinity();
  std::uint32_t wa = 0, wb = 0;
  for_each_cube_pair(dim, true, [&](std::uint32_t a, std::uint32_t b) {
    const double v = std::abs(s.y[a] - s.y[b]) - lip_distance(lip, verts[a], verts[b]) - T;
    if (v > rec.max_scenario_violation) {
      rec.max_scenario_violation = v;
      wa = a;
      wb = b;
    }
  });
  if (verts.size() < 2) rec.max_scenario_violation = -T;
  if (rec.max_scenario_violation > config.short_tol) {
    std::ostringstream os;
    os << "shortness: cube vertices " << CubeIndex(dim, wa).str() << " and "
       << CubeIndex(dim, wb).str() << " violate the constraint by " << rec.max_scenario_violation;
    fail(os.str());
  }

  const auto& data = spec.data();
  rec.max_data_violation = -std::numeric_limits<double>::infinity();
  std::size_t ve = 0, vi = 0;
  for (std::size_t e = 0; e < verts.size(); ++e) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v =
          std::abs(s.y[e] - data.value(i)) - lip_distance(lip, verts[e], data.point(i)) - T;
      if (v > rec.max_data_violation) {
        rec.max_data_violation = v;
        ve = e;
        vi = i;
      }
    }
  }
  if (data.empty()) rec.max_data_violation = 0.0;
  if (rec.max_data_violation > config.short_tol) {
    std::ostringstream os;
    os << "shortness: cube vertex " << CubeIndex(dim, static_cast<std::uint32_t>(ve)).str()
       << " and observation '" << data.label(vi) << "' violate the constraint by "
       << rec.max_data_violation;
    fail(os.str());
  }

  rec.objective = failure_probability(s, spec.theta());
  if (claimed_objective && std::abs(*claimed_objective - rec.objective) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "objective: claimed " << *claimed_objective << ", recomputed " << rec.objective;
    fail(os.str());
  }
  return rec;
}

}  // namespace lipuq::solver
