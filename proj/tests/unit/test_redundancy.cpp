#include <doctest.h>

#include <algorithm>

#include "lipuq/envelope.hpp"
#include "lipuq/errors.hpp"
#include "lipuq/redundancy.hpp"
#include "support/generators.hpp"

using namespace lipuq;
using namespace lipuq::redundancy;
using lipuq::testing::Gen;

namespace {

Dataset one(double z, double g) {
  Dataset d(1);
  d.add({z}, g, "in");
  return d;
}

// A random sub-box of the unit cube with sides at least 0.2.
Region random_region(Gen& g, std::size_t dim) {
  std::vector<Interval> iv;
  for (std::size_t k = 0; k < dim; ++k) {
    const double lo = g.uniform(0, 0.6);
    iv.push_back({lo, g.uniform(lo + 0.2, 0.8)});
  }
  return Region(std::move(iv));
}

}  // namespace

TEST_CASE("projection clamps each coordinate") {
  CHECK(project(Point{0.2}, Region({{0, 0.4}})) == Point{0.2});
  CHECK(project(Point{0.9}, Region({{0, 0.4}})) == Point{0.4});
  CHECK(project(Point{-1, 0.5}, Region({{0, 1}, {0, 1}})) == Point{0, 0.5});
  // p lies between V and x: d(x, z) = d(x, p) + d(p, z) for z in V
  Gen g(3);
  const LipschitzSpec lip({1.0, 2.0});
  for (int t = 0; t < 100; ++t) {
    const Region v = random_region(g, 2);
    const Point x{g.uniform(-1, 2), g.uniform(-1, 2)};
    const Point z = g.point(v);
    const Point p = project(x, v);
    CHECK(lip_distance(lip, x, z) == doctest::Approx(lip_distance(lip, x, p) + lip_distance(lip, p, z)));
  }
}

TEST_CASE("region_within") {
  const BoxDomain dom({{0, 1}});
  CHECK(region_within(Region({{0.2, 0.4}}), dom));
  CHECK_FALSE(region_within(Region({{0.2, 1.4}}), dom));
  CHECK_FALSE(region_within(Region({{0.2, 0.4}, {0, 1}}), dom));
}

TEST_CASE("sufficient condition examples") {
  const LipschitzSpec lip({1.0});
  const Region v({{0, 0.4}});
  // 0.7 <= 1.0 and 0.3 >= 0.0
  CHECK(is_redundant_sufficient({{0.9}, 0.5}, v, one(0.2, 0.5), lip));
  CHECK(is_redundant_definitional({{0.9}, 0.5}, v, one(0.2, 0.5), lip));

  SUBCASE("far away datum") {
    CHECK(is_redundant_sufficient({{40.0}, 3.0}, Region({{0, 1}}), one(0.5, 0.0), lip));
  }
  SUBCASE("adjacent datum pulled low cuts the feasible set") {
    const Datum z0{{0.5}, -0.3};
    CHECK_FALSE(is_redundant_sufficient(z0, v, one(0.2, 0.5), lip));
    CHECK_FALSE(is_redundant_definitional(z0, v, one(0.2, 0.5), lip));
  }
  SUBCASE("contract") {
    CHECK_THROWS_AS(is_redundant_sufficient({{0.3}, 0.5}, v, one(0.2, 0.5), lip), ContractError);
    CHECK_THROWS_AS(is_redundant_sufficient({{0.9}, 0.5}, v, Dataset(1), lip), ContractError);
    CHECK_THROWS_AS(is_redundant_sufficient({{0.9}, 0.5}, v, one(0.6, 0.5), lip), ContractError);
  }
}

TEST_CASE("a duplicated datum is redundant with respect to its copy") {
  const LipschitzSpec lip({1.0, 1.0});
  const Region v({{0, 1}, {0, 1}});
  Dataset d(2);
  d.add({0.3, 0.6}, 0.2);
  CHECK(is_redundant_definitional({{0.3, 0.6}, 0.2}, v, d, lip));
}

TEST_CASE("sufficient implies definitional on random 1D and 2D instances") {
  Gen g(404);
  int positives = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t dim = t % 2 == 0 ? 1 : 2;
    const auto box = lipuq::testing::unit_box(dim);
    std::vector<double> L;
    for (std::size_t k = 0; k < dim; ++k) L.push_back(g.uniform(0.2, 2.0));
    const LipschitzSpec lip(L, g.coin() ? 0.0 : g.uniform(0, 0.1));
    const auto f = lipuq::testing::random_short_function(g, box, LipschitzSpec(L));
    const Region v = random_region(g, dim);
    const auto data = lipuq::testing::sample(g, v, f, g.integer(1, 5));
    Point x0 = g.point(box);
    if (v.contains(x0)) continue;
    // shift the value off the graph so both outcomes occur
    const Datum z0{x0, f(x0) + g.uniform(-0.3, 0.3)};
    Dataset all = data;
    all.add(z0.x, z0.value);
    if (!lipschitz_feasible(all, lip)) continue;
    if (!is_redundant_sufficient(z0, v, data, lip)) continue;
    ++positives;
    CAPTURE(t);
    CHECK(is_redundant_definitional(z0, v, data, lip));
  }
  CHECK(positives > 10);
}

TEST_CASE("isolated interior data are relevant") {
  Gen g(505);
  for (int t = 0; t < 60; ++t) {
    const std::size_t dim = t % 2 == 0 ? 1 : 2;
    const auto box = lipuq::testing::unit_box(dim);
    std::vector<double> L;
    for (std::size_t k = 0; k < dim; ++k) L.push_back(g.uniform(0.2, 2.0));
    const LipschitzSpec lip(L);
    const auto f = lipuq::testing::random_short_function(g, box, lip);
    const auto data = lipuq::testing::sample(g, box, f, g.integer(2, 6));
    const std::vector<std::size_t> rest = [&] {
      std::vector<std::size_t> r;
      for (std::size_t i = 1; i < data.size(); ++i) r.push_back(i);
      return r;
    }();
    CAPTURE(t);
    CHECK_FALSE(is_redundant_definitional({data.point(0), data.value(0)}, box, data.subset(rest), lip));
  }
}

TEST_CASE("non-binding for a diameter maximiser") {
  const LipschitzSpec lip({1.0});
  diameter::DiameterReport r;
  r.x = {0.0};
  r.x_prime = {1.0};
  r.y = 0.5;
  r.y_prime = -0.5;
  CHECK(is_nonbinding_diameter({{0.0}, 0.5}, r, lip));
  CHECK(is_nonbinding_diameter({{0.5}, 0.0}, r, lip));
  // |y' - G| = 0.8 > 0.5
  CHECK_FALSE(is_nonbinding_diameter({{0.5}, 0.3}, r, lip));
  // slack T widens every cone
  CHECK(is_nonbinding_diameter({{0.5}, 0.3}, r, LipschitzSpec({1.0}, 0.35)));
}

TEST_CASE("non-binding for a pof witness") {
  const LipschitzSpec lip({1.0});
  Scenario s;
  s.x0 = {0.125};
  s.x1 = {1.0};
  s.p = {3.0 / 7.0};
  s.y = {0.0, 0.875};
  s.shape = {2};
  CHECK(is_nonbinding_pof({{0.5}, 0.375}, s, lip));
  CHECK(is_nonbinding_pof({{1.0}, 0.875}, s, lip));
  CHECK_FALSE(is_nonbinding_pof({{0.5}, 0.2}, s, lip));
}

TEST_CASE("redundant data do not change the subdiameter over V") {
  // Grid maximum of the polygon objective on V, with and without z0.
  Gen g(606);
  int checked = 0;
  for (int t = 0; t < 5000 && checked < 20; ++t) {
    const LipschitzSpec lip({g.uniform(0.5, 2.0)});
    const Region v({{0, 0.5}});
    Dataset d(1);
    d.add({g.uniform(0, 0.5)}, g.uniform(-0.5, 0.5));
    const Datum z0{{g.uniform(0.6, 1.0)}, g.uniform(-1, 1)};
    Dataset with_z = d;
    with_z.add(z0.x, z0.value);
    if (!lipschitz_feasible(with_z, lip) || !is_redundant_sufficient(z0, v, d, lip)) continue;
    ++checked;
    const envelope::Envelope a(d, lip), b(with_z, lip);
    double best_a = 0.0, best_b = 0.0;
    for (int i = 0; i <= 50; ++i) {
      for (int j = 0; j <= 50; ++j) {
        const Point x{0.5 * i / 50}, xp{0.5 * j / 50};
        best_a = std::max(best_a, envelope::polygon_objective(a, x, xp, 0));
        best_b = std::max(best_b, envelope::polygon_objective(b, x, xp, 0));
      }
    }
    CHECK(best_a == doctest::Approx(best_b).epsilon(1e-12));
  }
  CHECK(checked == 20);
}

TEST_CASE("active set on copies of one point") {
  Dataset d(1);
  for (int i = 0; i < 6; ++i) d.add({0.375}, 0.25, "c" + std::to_string(i));
  const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), d, 0.5, 0.0);
  solver::SolverConfig cfg;
  cfg.restarts = 1;
  const auto r = active_set_solve(spec, cfg);
  CHECK(r.terminated);
  CHECK(r.state.iteration == 1);
  CHECK(r.state.enforced.size() == 1);
  CHECK(r.value == doctest::Approx(3.0 / 7.0).epsilon(1e-3));
}

TEST_CASE("active set on copies of one point, diameter objective") {
  Dataset d(2);
  for (int i = 0; i < 4; ++i) d.add({0.2, 0.7}, 1.0);
  const ProblemSpec spec(lipuq::testing::unit_box(2), LipschitzSpec({1.0, 0.5}), d, 0.0);
  solver::SolverConfig cfg;
  cfg.restarts = 1;
  ActiveSetOptions o;
  o.objective = Objective::Diameter;
  o.k = 1;
  const auto r = active_set_solve(spec, cfg, o);
  CHECK(r.state.enforced.size() == 1);
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("points on the witness graph tie, and single-winner drops them") {
  // Every datum lies on x0 = 1/8, y0 = 0; x1 = 1, y1 = 7/8, so each alone
  // scores 3/7 and none binds once the first is enforced.
  Dataset d(1);
  d.add({0.375}, 0.25, "A");
  d.add({0.5}, 0.375, "E");
  d.add({0.6875}, 0.5625, "C");
  d.add({0.75}, 0.625, "G");
  const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), d, 0.5, 0.0);
  solver::SolverConfig cfg;
  cfg.restarts = 2;
  const auto full = pof::phat_sup(spec, cfg);
  CHECK(full.phat == doctest::Approx(3.0 / 7.0).epsilon(1e-4));

  const auto literal = active_set_solve(spec, cfg);
  CHECK(literal.terminated);
  CHECK(literal.state.history.size() == 1);
  CHECK(literal.state.enforced.size() == 4);

  ActiveSetOptions one;
  one.single_winner = true;
  const auto r = active_set_solve(spec, cfg, one);
  CHECK(r.terminated);
  CHECK(r.state.enforced == std::vector<std::size_t>{0});
  CHECK(r.state.candidates.empty());
  CHECK(r.value == doctest::Approx(full.phat).epsilon(2 * cfg.outer_tol));
}

TEST_CASE("active set matches the full pof solve") {
  Gen g(77);
  const auto box = lipuq::testing::unit_box(2);
  const LipschitzSpec lip({0.6, 0.4});
  const auto f = lipuq::testing::random_short_function(g, box, lip);
  const auto data = lipuq::testing::sample(g, box, f, 6);
  double mean = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) mean += data.value(i) / data.size();
  const ProblemSpec spec(box, lip, data, mean, mean - 0.2);
  solver::SolverConfig cfg;
  cfg.restarts = 2;
  const auto full = pof::phat_sup(spec, cfg);
  const auto r = active_set_solve(spec, cfg);
  CHECK(r.terminated);
  CHECK(r.pof->verification.valid);
  CHECK(r.value == doctest::Approx(full.phat).epsilon(2 * cfg.outer_tol + 1e-6));
}
