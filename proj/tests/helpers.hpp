#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "doctest.h"
#include "dynsq/core.hpp"
#include "dynsq/error.hpp"
#include "dynsq/rng.hpp"

// Asserts that `expr` throws dynsq::Error with the given code.
#define CHECK_ERROR_CODE(expr, expected)                    \
  do {                                                      \
    bool caught_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const dynsq::Error& e_) {                      \
      caught_ = true;                                       \
      CHECK(e_.code() == (expected));                       \
    }                                                       \
    CHECK_MESSAGE(caught_, "expected dynsq::Error " #expr); \
  } while (0)

inline double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  auto k = xs.size() / 2;
  return xs.size() % 2 ? xs[k] : 0.5 * (xs[k - 1] + xs[k]);
}

// Random pmf over degrees in [0, max_degree], optionally reserving some mass
// for infinite degree.
inline dynsq::DegreeDistribution random_degree_dist(dynsq::Rng& rng,
                                                    std::uint32_t max_degree,
                                                    double infinity_mass = 0.0) {
  std::map<std::uint32_t, double> probs;
  auto atoms = 1 + rng.uniform_index(4);
  double total = 0;
  for (std::uint64_t a = 0; a < atoms; ++a) {
    auto d = std::uint32_t(rng.uniform_index(max_degree + 1));
    double w = rng.uniform01() + 0.05;
    probs[d] += w;
    total += w;
  }
  double scale = (1.0 - infinity_mass) / total;
  for (auto& [d, w] : probs) w *= scale;
  // Rounding can leave the total a few ulps off; rebalance on the first atom.
  double sum = infinity_mass;
  for (auto& [d, w] : probs) sum += w;
  probs.begin()->second += 1.0 - sum;
  return dynsq::DegreeDistribution::validated(probs, infinity_mass);
}
