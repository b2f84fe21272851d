#pragma once

#include <cstddef>
#include <vector>

#include "dynsq/core.hpp"

namespace dynsq {

/// Probability that an incoming task is dispatched to a server already
/// holding at least `level` tasks, in the large-system limit at occupancy q
/// and normalized load lambda. Level 0 returns 1. The boundary term only
/// activates when q(level) sits at 1 (within 1e-9) and the distribution has
/// mass at infinity.
double dispatch_tail_prob(const OccupancyState& q, std::size_t level,
                          double lambda, const DegreeDistribution& dist);

/// Same quantity written as an explicit case split on the longest prefix of
/// levels pinned at 1. Kept as an independent cross-check of the compact
/// formula; the two agree to 1e-12.
double dispatch_tail_prob_cases(const OccupancyState& q, std::size_t level,
                                double lambda, const DegreeDistribution& dist);

/// Time derivative of q(i) for i = 1..q.max_level(), treating levels beyond
/// the stored tail as zero. q(0) is constant and carries no derivative.
std::vector<double> fluid_rhs(const OccupancyState& q, double lambda,
                              const DegreeDistribution& dist);

struct FluidSolution {
  std::vector<double> times;          // 0, s*h, 2*s*h, ... (s = record_stride)
  std::vector<OccupancyState> states;
  std::size_t max_level_used = 0;
  double step = 0.0;
};

/// Classical fixed-step RK4 for the occupancy ODE. After every step the
/// state is clamped to [0, 1] and swept monotone; if that projection ever
/// moves a coordinate by more than 1e-6 the step size is too coarse and
/// StepTooLarge is thrown. The tail grows automatically while mass spreads
/// upward (extension threshold 1e-10).
FluidSolution integrate_fluid(const OccupancyState& q0, double lambda,
                              const DegreeDistribution& dist, double horizon,
                              double step = 1e-3, std::size_t record_stride = 1);

/// Probability that a uniformly chosen d-subset of n servers lands entirely
/// inside the nx least-loaded ones: product over m < d of
/// ((n x - m) / (n - m)) clamped at zero; 1 for d = 0, 0 for d > n.
double uniform_subset_prob(std::uint64_t n, std::uint64_t d, double x);

/// Finite-n dispatch tail probability: sum over finite degrees d <= n-1 of
/// p(d) * uniform_subset_prob(n, d+1, x). Converges to x * pgf(x) uniformly
/// on [0, theta] for theta < 1 as n grows.
double dispatch_tail_prob_finite(std::uint64_t n, double x,
                                 const DegreeDistribution& dist);

}  // namespace dynsq
