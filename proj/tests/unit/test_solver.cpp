#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lipuq/constraints.hpp"
#include "lipuq/errors.hpp"
#include "lipuq/solver.hpp"
#include "support/generators.hpp"

using namespace lipuq;
using namespace lipuq::solver;
using lipuq::testing::Gen;

namespace {

Box cube(std::size_t n, double lo, double hi) {
  Box b;
  b.lo.assign(n, lo);
  b.hi.assign(n, hi);
  return b;
}

Dataset one(double z, double g) {
  Dataset d(1);
  d.add({z}, g, "z");
  return d;
}

Scenario scenario_1d(double x0, double x1, double p, double y0, double y1) {
  Scenario s;
  s.x0 = {x0};
  s.x1 = {x1};
  s.p = {p};
  s.y = {y0, y1};
  s.shape = {2};
  return s;
}

}  // namespace

TEST_CASE("sphere in five dimensions") {
  DeOptions o;
  o.seed = 1;
  Objective f = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  const auto r = de_optimize(f, cube(5, -5, 5), {}, o, Direction::Minimize);
  CHECK(r.best_value <= 1e-8);
  CHECK(r.evaluations > 0);
  CHECK(r.trace.rows.size() == static_cast<std::size_t>(r.generations) + 1);
}

TEST_CASE("maximise -|x - 0.3|") {
  DeOptions o;
  o.seed = 2;
  o.termination = Termination::change_over_generations(1e-12, 100);
  Objective f = [](std::span<const double> x) { return -std::abs(x[0] - 0.3); };
  const auto r = de_optimize(f, cube(1, 0, 1), {}, o, Direction::Maximize);
  CHECK(r.best[0] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(r.best_value <= 0.0);
}

TEST_CASE("same seed, same run; thread count does not matter") {
  Objective f = [](std::span<const double> x) { return std::sin(5 * x[0]) + std::cos(3 * x[1]); };
  DeOptions o;
  o.seed = 99;
  const auto a = de_optimize(f, cube(2, 0, 3), {}, o, Direction::Minimize);
  o.threads = 4;
  const auto b = de_optimize(f, cube(2, 0, 3), {}, o, Direction::Minimize);
  CHECK(a.best == b.best);
  CHECK(a.evaluations == b.evaluations);
  o.seed = 100;
  const auto c = de_optimize(f, cube(2, 0, 3), {}, o, Direction::Minimize);
  CHECK(c.trace.rows.size() > 0);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("feasible beats infeasible, then residual decides") {
  const Fitness ok{5.0, 0.0, true};
  const Fitness bad{-100.0, 0.2, false};
  const Fitness worse{-100.0, 0.5, false};
  CHECK(better(ok, bad));
  CHECK(better(bad, worse));
  CHECK(better(Fitness{1.0, 0.0, true}, Fitness{2.0, 0.0, true}));
}

TEST_CASE("termination rules") {
  const auto cog = Termination::change_over_generations(1e-6, 3);
  // no improvement over the last three generations
  std::vector<Fitness> h{{1.0}, {0.5}, {0.5}, {0.5}, {0.5}};
  CHECK_FALSE(cog.satisfied(std::span(h).first(4)));
  CHECK(cog.satisfied(h));
  const auto vtr = Termination::value_to_reach(0.0, 1e-9);
  CHECK(vtr.satisfied(std::vector<Fitness>{{1e-10}}));
  CHECK_FALSE(vtr.satisfied(std::vector<Fitness>{{1e-3}}));
}

TEST_CASE("trace CSV columns") {
  Trace t;
  t.rows.push_back({0, 0.5, 0.0});
  t.rows.push_back({1, 0.25, 0.0});
  std::ostringstream os;
  t.write_csv(os);
  CHECK(os.str().rfind("generation,best_value,feasibility_residual\n", 0) == 0);
  CHECK(os.str().find("1,0.25,0") != std::string::npos);
}

TEST_CASE("C' clamps weights") {
  auto s = normalize_weights(scenario_1d(0, 1, 1.3, 0, 0));
  CHECK(s.p[0] == 1.0);
  s = normalize_weights(scenario_1d(0, 1, -0.2, 0, 0));
  CHECK(s.p[0] == 0.0);
  s = normalize_weights(scenario_1d(0, 1, 0.4, 0, 0));
  CHECK(s.p[0] == 0.4);
}

TEST_CASE("C'' shifts values up to the mean") {
  auto s = impose_mean(scenario_1d(0, 1, 0.5, 0, 0), 1.0);
  CHECK(s.y[0] == doctest::Approx(1.0));
  CHECK(s.y[1] == doctest::Approx(1.0));
  const auto same = impose_mean(scenario_1d(0, 1, 0.5, 0, 2), 1.0);
  CHECK(same.y == std::vector<double>{0, 2});
  Gen g(8);
  for (int t = 0; t < 50; ++t) {
    auto r = scenario_1d(0, 1, g.uniform(0, 1), g.uniform(-2, 2), g.uniform(-2, 2));
    const double m = g.uniform(-1, 3);
    const auto out = impose_mean(r, m);
    CHECK(out.y[1] - out.y[0] == doctest::Approx(r.y[1] - r.y[0]));
    CHECK(mean_value(out) >= m - 1e-12);
  }
}

TEST_CASE("C imposes shortness") {
  SolverConfig cfg;
  SUBCASE("already short") {
    const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), one(0.0, 0.0), -1.0);
    const auto r = impose_shortness(scenario_1d(0.2, 0.6, 0.5, 0.1, 0.3), spec, cfg);
    CHECK(r.residual == 0.0);
    CHECK(r.scenario.y == std::vector<double>{0.1, 0.3});
  }
  SUBCASE("value above the cone is pulled in") {
    const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), one(0.0, 0.0), -1.0);
    const auto r = impose_shortness(scenario_1d(0.5, 0.5, 1.0, 2.0, 2.0), spec, cfg);
    CHECK(r.feasible);
    CHECK(r.residual == 0.0);
    CHECK(std::abs(r.scenario.y[0]) <= 0.5 + cfg.short_tol);
  }
  SUBCASE("mean above every reachable value") {
    const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), one(0.0, 0.0), 5.0);
    const auto r = impose_shortness(impose_mean(scenario_1d(0.5, 0.9, 0.5, 0.0, 0.0), 5.0), spec, cfg);
    CHECK_FALSE(r.feasible);
    CHECK(r.residual > 0.0);
  }
}

TEST_CASE("edge constraints suffice only without tolerance") {
  CHECK_FALSE(needs_all_pairs(LipschitzSpec({1.0, 1.0})));
  CHECK(needs_all_pairs(LipschitzSpec({1.0, 1.0}, 0.1)));
}

TEST_CASE("codec round trip") {
  Gen g(12);
  Dataset d(3);
  d.add({0.5, 0.5, 0.5}, 0.0);
  const ProblemSpec spec(lipuq::testing::unit_box(3), LipschitzSpec({1, 1, 1}), d, 0.0);
  for (const SupportShape& shape : {SupportShape{2, 2, 2}, SupportShape{1, 1, 2}, SupportShape{1, 1, 1}}) {
    const ScenarioCodec codec(spec, shape, 1e-6);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> raw(codec.size());
      for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = g.uniform(codec.bounds().lo[i], codec.bounds().hi[i]);
      const auto s = codec.decode_exact(raw);
      CHECK(codec.encode(s) == raw);
      for (std::size_t k = 0; k < 3; ++k) {
        if (shape[k] == 1) {
          CHECK(s.x1[k] == s.x0[k]);
          CHECK(s.p[k] == 1.0);
        }
      }
    }
  }
  CHECK(ScenarioCodec(spec, {2, 2, 2}, 0.0).size() == decision_variable_count(3));
}

TEST_CASE("verification") {
  const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), one(0.375, 0.25), 0.5, 0.0);
  SolverConfig cfg;
  SUBCASE("a scenario built by hand to attain 3/7") {
    const auto s = scenario_1d(1.0, 0.0, 4.0 / 7.0, 0.875, 0.0);
    const auto v = verify(s, spec, cfg, 3.0 / 7.0);
    CHECK(v.valid);
    CHECK(v.objective == doctest::Approx(3.0 / 7.0));
  }
  SUBCASE("one edge violated by 0.1") {
    const auto s = scenario_1d(0.5, 0.6, 0.5, 0.25, 0.45);
    const auto v = verify(s, spec, cfg);
    CHECK_FALSE(v.valid);
    CHECK(v.max_scenario_violation == doctest::Approx(0.1));
    REQUIRE_FALSE(v.violations.empty());
    bool named = false;
    for (const auto& msg : v.violations) named = named || msg.find("vertices 0 and 1") != std::string::npos;
    CHECK(named);
  }
  SUBCASE("claimed objective that disagrees") {
    const auto s = scenario_1d(1.0, 0.0, 4.0 / 7.0, 0.875, 0.0);
    CHECK_FALSE(verify(s, spec, cfg, 0.9).valid);
  }
}

TEST_CASE("solver config is validated") {
  SolverConfig c;
  c.outer_npop = 3;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = SolverConfig{};
  c.de_crossover = 1.5;
  CHECK_THROWS_AS(c.validate(), ContractError);
}
