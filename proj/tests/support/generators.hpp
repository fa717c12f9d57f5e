#pragma once

// Seeded random instances for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lipuq/core.hpp"

namespace lipuq::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  Point point(const BoxDomain& d) {
    Point x(d.dim());
    for (std::size_t k = 0; k < d.dim(); ++k) x[k] = uniform(d[k].lo, d[k].hi);
    return x;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline BoxDomain unit_box(std::size_t dim) {
  return BoxDomain(std::vector<Interval>(dim, Interval{0.0, 1.0}));
}

/// g(x) = c + sum_j a_j |x - c_j|_L / n with sum |a_j| <= 1: d_L-short.
struct ShortFunction {
  LipschitzSpec lip;
  double offset = 0.0;
  std::vector<Point> centres;
  std::vector<double> weights;

  double operator()(std::span<const double> x) const {
    double v = offset;
    for (std::size_t j = 0; j < centres.size(); ++j) v += weights[j] * lip_distance(lip, x, centres[j]);
    return v;
  }
};

inline ShortFunction random_short_function(Gen& g, const BoxDomain& d, const LipschitzSpec& lip,
                                           int terms = 3) {
  ShortFunction f;
  f.lip = LipschitzSpec(lip.constants(), 0.0);
  f.offset = g.uniform(-1.0, 1.0);
  double budget = 1.0;
  for (int j = 0; j < terms; ++j) {
    f.centres.push_back(g.point(d));
    const double w = g.uniform(-budget, budget) * (j + 1 == terms ? 1.0 : 0.7);
    budget -= std::abs(w);
    f.weights.push_back(w);
  }
  return f;
}

inline Dataset sample(Gen& g, const BoxDomain& d, const std::function<double(std::span<const double>)>& f,
                      int n) {
  Dataset data(d.dim());
  for (int i = 0; i < n; ++i) {
    Point x = g.point(d);
    const double v = f(x);
    data.add(std::move(x), v, "z" + std::to_string(i));
  }
  return data;
}

}  // namespace lipuq::testing
