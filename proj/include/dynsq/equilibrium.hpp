#pragma once

#include <cstdint>

#include "dynsq/core.hpp"

namespace dynsq {

/// Fixed point of the occupancy dynamics: q*(0) = 1, q*(1) = lambda,
/// q*(i) = lambda * q*(i-1) * pgf(q*(i-1)).
struct EquilibriumPoint {
  OccupancyState values;
  double lambda = 0.0;
};

/// Computes the fixed point, truncating once values drop below `floor` or
/// the level cap is reached. Throws LoadOutOfRange unless 0 < lambda < 1.
EquilibriumPoint equilibrium_point(double lambda, const DegreeDistribution& dist,
                                   double floor = 1e-14,
                                   std::size_t level_cap = 10000);

/// Stationary mean response time, sum_{i>=1} q*(i) / lambda.
double mean_response_time(const EquilibriumPoint& eq);

struct BoundsPair {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sandwich bounds on q*(level) for level >= 2 driven by the smallest degree
/// carrying mass. Doubly exponential decay on both sides when that degree is
/// positive, geometric when it is zero. Throws NoFiniteSupport when all mass
/// sits at infinity, DomainError for level < 2.
BoundsPair phase_transition_bounds(double lambda, const DegreeDistribution& dist,
                                   std::size_t level);

/// Best possible equilibrium tail among degree distributions with mean at
/// most `mean_degree`: lambda^level when the mean is zero, otherwise
/// lambda^(((d+1)^level - 1)/d). Attained exactly by the point mass at an
/// integer mean.
double optimal_lower_bound(double lambda, double mean_degree, std::size_t level);

struct ConvexityBoundCheck {
  double pgf_value = 0.0;       // pgf(c)
  double piecewise_bound = 0.0; // interpolation between adjacent powers
  double power_bound = 0.0;     // c^mean_bound
};

/// Evaluates the convexity chain pgf(c) >= piecewise >= c^d for a
/// distribution with mean at most `mean_bound`, at a point c in (0, 1).
ConvexityBoundCheck pgf_convexity_bounds(double c, const DegreeDistribution& dist,
                                         double mean_bound);

/// Exact stationary occupancy of the n-server join-shortest-queue system on
/// the complete interaction graph, for n <= 3, solved from the truncated
/// Markov chain (arrivals hitting a queue at the cap are dropped). Throws
/// CapTooSmall when the truncation holds more than 1e-8 stationary mass,
/// DomainError for n outside 1..3.
OccupancyState small_ctmc_stationary(std::uint32_t n, double lambda_n,
                                     std::uint32_t queue_cap);

}  // namespace dynsq
