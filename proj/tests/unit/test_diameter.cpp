#include <doctest.h>

#include <cmath>

#include "lipuq/diameter.hpp"
#include "lipuq/errors.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace lipuq;
using namespace lipuq::diameter;
using lipuq::testing::Gen;

TEST_CASE("one observation: D^_1 = L") {
  for (double L : {0.5, 1.0, 3.0}) {
    Dataset d(1);
    d.add({0.3}, 2.0);
    const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({L}), d, 0.0);
    const auto r = dhat_k(spec, 0, solver::SolverConfig{});
    CHECK(r.dhat_k == doctest::Approx(L).epsilon(1e-6));
    CHECK(r.error_cap == doctest::Approx(4.0 * r.gamma));
  }
}

TEST_CASE("zero gap limit recovers the true subdiameter") {
  // Affine g with L = |a|: the cone of every datum is tight.
  Dataset d(2);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j) d.add({i / 2.0, j / 2.0}, 0.4 * i / 2.0 - 0.7 * j / 2.0);
  const ProblemSpec spec(BoxDomain({{0, 1}, {0, 1}}), LipschitzSpec({0.4, 0.7}), d, 0.0);
  const auto all = dhat_all(spec, solver::SolverConfig{});
  CHECK(all[0].dhat_k == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(all[1].dhat_k == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(dhat(std::vector<double>{all[0].dhat_k, all[1].dhat_k}) ==
        doctest::Approx(std::sqrt(0.4 * 0.4 + 0.7 * 0.7)).epsilon(1e-6));
}

TEST_CASE("sandwich against a grid subdiameter on small random instances") {
  Gen g(71);
  solver::SolverConfig cfg;
  cfg.restarts = 2;
  for (int t = 0; t < 6; ++t) {
    const auto box = lipuq::testing::unit_box(2);
    const LipschitzSpec lip({g.uniform(0.3, 1.5), g.uniform(0.3, 1.5)});
    const auto f = lipuq::testing::random_short_function(g, box, lip);
    const auto data = lipuq::testing::sample(g, box, f, g.integer(3, 8));
    const ProblemSpec spec(box, lip, data, 0.0);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto r = dhat_k(spec, k, cfg);
      const double truth = lipuq::testing::grid_subdiameter_2d(f, k, 61);
      CHECK(r.dhat_k >= truth - 1e-6);
      CHECK(r.dhat_k - truth <= 4.0 * r.gamma + 1e-6);
    }
  }
}

TEST_CASE("root-sum-square and the error cap") {
  CHECK(dhat(std::vector<double>{3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(dhat(std::vector<double>{2.5}) == doctest::Approx(2.5));
  for (int N : {3, 5, 9}) {
    const double gamma = 1.0 / (2.0 * (N - 1));
    CHECK(diameter_error_cap(gamma) == doctest::Approx(2.0 / (N - 1)));
  }
}

TEST_CASE("McDiarmid bound and certification") {
  CHECK(mcdiarmid_pof_bound(1.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(mcdiarmid_pof_bound(1.0, 0.0, 1.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(mcdiarmid_pof_bound(1.0, 0.0, 2.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(mcdiarmid_pof_bound(1.0, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(certify(1.0, 0.0, 1.0, std::exp(-2.0)));
  CHECK(certify(0.0, 5.0, 1.0, 1.0));
  CHECK_FALSE(certify(0.5, 0.0, 1.0, std::exp(-2.0)));
}

TEST_CASE("optimal one-coordinate bound") {
  CHECK(optimal_mcdiarmid_k1(0.5, 0.875) == doctest::Approx(3.0 / 7.0));
  CHECK(optimal_mcdiarmid_k1(-1.0, 0.875) == doctest::Approx(1.0));
  CHECK(optimal_mcdiarmid_k1(0.0, 0.875) == doctest::Approx(1.0));
  CHECK(optimal_mcdiarmid_k1(1.0, 0.875) == doctest::Approx(0.0));
}

TEST_CASE("coordinate index is checked") {
  Dataset d(1);
  d.add({0.3}, 2.0);
  const ProblemSpec spec(BoxDomain({{0, 1}}), LipschitzSpec({1.0}), d, 0.0);
  CHECK_THROWS_AS(dhat_k(spec, 1, solver::SolverConfig{}), ContractError);
}
