#include "lipuq/envelope.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "lipuq/errors.hpp"

namespace lipuq {

double ExtendedReal::value() const {
  if (kind_ != Kind::Finite) throw ContractError("ExtendedReal: value() of an infinite sentinel");
  return value_;
}

std::string ExtendedReal::str() const {
  switch (kind_) {
    case Kind::PlusInfinity:
      return "+inf";
    case Kind::MinusInfinity:
      return "-inf";
    case Kind::Finite:
      break;
  }
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

namespace envelope {

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ')';
  return os.str();
}

solver::Box domain_box(const BoxDomain& domain) {
  solver::Box b;
  for (const auto& iv : domain.bounds()) {
    b.lo.push_back(iv.lo);
    b.hi.push_back(iv.hi);
  }
  return b;
}

// Best of `config.restarts` independent maximisations of `f` over the domain.
SearchReport maximize_over_domain(const BoxDomain& domain, const solver::Objective& f,
                                  const solver::SolverConfig& config, std::uint64_t tag) {
  SearchReport best;
  best.seed = config.seed;
  const auto box = domain_box(domain);
  double best_value = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.restarts; ++r) {
    const auto seed = solver::derive_seed(config.seed, tag, static_cast<std::uint64_t>(r));
    auto opts = solver::outer_options(config, seed);
    auto res = solver::de_optimize(f, box, {}, opts, solver::Direction::Maximize);
    best.evaluations += res.evaluations;
    if (res.best_value > best_value) {
      best_value = res.best_value;
      best.argmax = res.best;
      best.trace = std::move(res.trace);
    }
  }
  best.value = ExtendedReal(best_value);
  return best;
}

}  // namespace

Envelope::Envelope(const Dataset& data, const LipschitzSpec& lip) : data_(&data), lip_(&lip) {
  if (!data.empty() && data.dim() != lip.dim()) {
    throw ContractError("Envelope: data and Lipschitz constants differ in dimension");
  }
}

double Envelope::upper_value(std::span<const double> x) const {
  const auto& s = data_->samples();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    best = std::min(best, s.values[i] + lip_distance(*lip_, x, s.points[i]));
  }
  return best + lip_->tolerance();
}

double Envelope::lower_value(std::span<const double> x) const {
  const auto& s = data_->samples();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    best = std::max(best, s.values[i] - lip_distance(*lip_, x, s.points[i]));
  }
  return best - lip_->tolerance();
}

ExtendedReal Envelope::upper(std::span<const double> x) const {
  if (empty()) return ExtendedReal::plus_infinity();
  if (x.size() != lip_->dim()) throw ContractError("Envelope::upper: dimension mismatch");
  return ExtendedReal(upper_value(x));
}

ExtendedReal Envelope::lower(std::span<const double> x) const {
  if (empty()) return ExtendedReal::minus_infinity();
  if (x.size() != lip_->dim()) throw ContractError("Envelope::lower: dimension mismatch");
  return ExtendedReal(lower_value(x));
}

std::vector<std::size_t> Envelope::upper_binding(std::span<const double> x, double tol) const {
  std::vector<std::size_t> out;
  if (empty()) return out;
  const double u = upper_value(x) - lip_->tolerance();
  const auto& s = data_->samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.values[i] + lip_distance(*lip_, x, s.points[i]) <= u + tol) out.push_back(i);
  }
  return out;
}

PolygonCorner polygon_maximizer(const Envelope& env, std::span<const double> x,
                                std::span<const double> x_prime, std::size_t k) {
  const auto& lip = env.lip();
  if (x.size() != lip.dim() || x_prime.size() != lip.dim() || k >= lip.dim()) {
    throw ContractError("polygon_objective: dimension mismatch");
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (j != k && x[j] != x_prime[j]) {
      throw ContractError("polygon_objective: points differ outside coordinate k");
    }
  }
  if (env.empty()) throw ContractError("polygon_objective: empty dataset");

  double up = env.upper_value(x), lo = env.lower_value(x);
  double up_p = env.upper_value(x_prime), lo_p = env.lower_value(x_prime);
  // A crossing of a few ulps is tight data, not an empty interval.
  auto settle = [](double& u, double& l, std::span<const double> at) {
    if (u >= l) return;
    if (l - u > kRoundingSlack * std::max({1.0, std::abs(u), std::abs(l)})) {
      throw InfeasibleError("empty feasible interval at " + format_point(at));
    }
    u = l = 0.5 * (u + l);
  };
  settle(up, lo, x);
  settle(up_p, lo_p, x_prime);

  const double reach = lip_distance(lip, x, x_prime) + lip.tolerance();
  // y above y' and y' above y; the polygon is symmetric only for symmetric data.
  const double rise = std::min(reach, up - lo_p);
  const double fall = std::min(reach, up_p - lo);

  PolygonCorner c;
  if (rise >= fall) {
    c.value = rise;
    c.y_prime = std::max(lo_p, lo - rise);
    c.y = c.y_prime + rise;
  }
  if (fall > rise || (fall == rise && std::max(lo, lo_p - fall) < c.y)) {
    c.value = fall;
    c.y = std::max(lo, lo_p - fall);
    c.y_prime = c.y + fall;
  }
  return c;
}

double polygon_objective(const Envelope& env, std::span<const double> x,
                         std::span<const double> x_prime, std::size_t k) {
  return polygon_maximizer(env, x, x_prime, k).value;
}

namespace {

// The distance to the nearest datum is piecewise linear; its maxima put each
// coordinate on a bound, a datum coordinate or a midpoint between neighbouring
// datum coordinates. Snap the search result to the nearest such values.
void polish_gap(const BoxDomain& domain, const PointSet& s, const solver::Objective& f,
                SearchReport& rep) {
  const std::size_t dim = domain.dim();
  if (rep.argmax.size() != dim || dim > 16) return;
  std::vector<std::array<double, 2>> around(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    std::vector<double> c{domain[k].lo, domain[k].hi};
    for (const auto& z : s.points) c.push_back(z[k]);
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    const std::size_t n = c.size();
    for (std::size_t i = 0; i + 1 < n; ++i) c.push_back(0.5 * (c[i] + c[i + 1]));
    std::sort(c.begin(), c.end());
    const double x = rep.argmax[k];
    auto hi = std::lower_bound(c.begin(), c.end(), x);
    around[k] = {hi == c.begin() ? *hi : *(hi - 1), hi == c.end() ? c.back() : *hi};
  }
  const double found = rep.value.value();
  double best = found;
  Point best_x = rep.argmax;
  Point x(dim);
  for (std::uint32_t mask = 0; mask < (1u << dim); ++mask) {
    for (std::size_t k = 0; k < dim; ++k) x[k] = around[k][(mask >> k) & 1u];
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  if (best > found) {
    rep.value = ExtendedReal(best);
    rep.argmax = best_x;
  }
}

}  // namespace

SearchReport gap_size(const BoxDomain& domain, const Dataset& data, const LipschitzSpec& lip,
                      const solver::SolverConfig& config) {
  config.validate();
  if (data.empty()) {
    SearchReport r;
    r.value = ExtendedReal::plus_infinity();
    r.seed = config.seed;
    return r;
  }
  const auto& s = data.samples();
  solver::Objective f = [&](std::span<const double> x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : s.points) best = std::min(best, lip_distance(lip, x, z));
    return best;
  };
  auto rep = maximize_over_domain(domain, f, config, 0x6a9);
  polish_gap(domain, s, f, rep);
  return rep;
}

MarkovMaximum markov_max(const ProblemSpec& spec, const solver::SolverConfig& config) {
  config.validate();
  MarkovMaximum out;
  if (spec.data().empty()) {
    out.search.value = ExtendedReal::plus_infinity();
    out.search.seed = config.seed;
    return out;
  }
  Envelope env(spec);
  solver::Objective f = [&](std::span<const double> x) { return env.upper_value(x); };
  out.search = maximize_over_domain(spec.domain(), f, config, 0x3a7);
  const double scale = std::max(1.0, std::abs(out.search.value.value()));
  out.binding = env.upper_binding(out.search.argmax, 1e-6 * scale);
  return out;
}

MarkovBound markov_bound(double M, double m, double theta) {
  if (theta >= M) return {1.0, true};
  return {std::clamp((M - m) / (M - theta), 0.0, 1.0), false};
}

LipschitzFit fit_lipschitz(const BoxDomain& domain, const Dataset& data, double tolerance,
                           const std::vector<Interval>& bounds, const solver::SolverConfig& config) {
  config.validate();
  const std::size_t dim = domain.dim();
  if (bounds.size() != dim) throw ContractError("fit_lipschitz: one bound interval per coordinate");
  std::vector<double> lo(dim), hi(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(bounds[k].lo >= 0.0) || bounds[k].lo > bounds[k].hi) {
      throw ContractError("fit_lipschitz: bounds must satisfy 0 <= lo <= hi");
    }
    lo[k] = bounds[k].lo;
    hi[k] = bounds[k].hi;
  }
  data.check_inside(domain);

  const LipschitzSpec top(hi, tolerance);
  if (auto v = worst_violation(data, top)) {
    std::ostringstream os;
    os << "no feasible Lipschitz constants in the box: observations '" << data.label(v->first)
       << "' and '" << data.label(v->second) << "' violate the constraint by " << v->excess
       << " even at the upper bounds";
    throw InfeasibleError(os.str());
  }

  // Feasibility is monotone along L + t (hi - L), so the smallest feasible t
  // has a closed form over the observation pairs.
  const auto& s = data.samples();
  auto repair = [&](std::vector<double> raw) {
    for (std::size_t k = 0; k < dim; ++k) raw[k] = std::clamp(raw[k], lo[k], hi[k]);
    double t = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        double base = 0.0, slope = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          const double dz = std::abs(s.points[i][k] - s.points[j][k]);
          base += raw[k] * dz;
          slope += (hi[k] - raw[k]) * dz;
        }
        const double need = std::abs(s.values[i] - s.values[j]) - tolerance - base;
        if (need > 0.0) t = std::max(t, slope > 0.0 ? need / slope : 1.0);
      }
    }
    t = std::min(t, 1.0);
    auto at = [&](double tt) {
      std::vector<double> l(dim);
      for (std::size_t k = 0; k < dim; ++k) l[k] = std::min(hi[k], raw[k] + tt * (hi[k] - raw[k]));
      return l;
    };
    auto l = at(t);
    // Rounding can leave the repaired point a few ulps short of feasible.
    for (int step = 0; step < 64 && !lipschitz_feasible(data, LipschitzSpec(l, tolerance)); ++step) {
      t = std::min(1.0, t + std::max(4.0 * std::numeric_limits<double>::epsilon(), t * 1e-15) *
                                std::ldexp(1.0, step));
      l = at(t);
    }
    return l;
  };

  solver::SolverConfig inner = config;
  inner.outer_npop = std::max(8, config.outer_npop / 2);
  inner.outer_ngen = std::max(10, config.outer_ngen / 4);
  inner.outer_max_generations = std::min(config.outer_max_generations, 400);
  inner.restarts = 1;
  inner.seed = solver::derive_seed(config.seed, 0xf17);

  solver::Chain chain = [&](std::vector<double> raw, std::uint64_t) {
    solver::ChainOutput out;
    out.vector = repair(std::move(raw));
    return out;
  };
  solver::Objective gamma = [&](std::span<const double> l) {
    const LipschitzSpec spec(std::vector<double>(l.begin(), l.end()), tolerance);
    return gap_size(domain, data, spec, inner).value.value();
  };

  LipschitzFit fit;
  fit.seed = config.seed;
  solver::Box box{lo, hi};
  auto opts = solver::outer_options(config, solver::derive_seed(config.seed, 0xf18));
  opts.initial_members.push_back(repair(lo));
  auto res = solver::de_optimize(gamma, box, chain, opts, solver::Direction::Minimize);
  fit.lip = LipschitzSpec(res.best, tolerance);
  fit.trace = std::move(res.trace);
  fit.evaluations = res.evaluations;
  fit.gap = gap_size(domain, data, fit.lip, config);
  return fit;
}

}  // namespace envelope
}  // namespace lipuq
