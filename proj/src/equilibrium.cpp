#include "dynsq/equilibrium.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dynsq {

EquilibriumPoint equilibrium_point(double lambda, const DegreeDistribution& dist,
                                   double floor, std::size_t level_cap) {
  if (!(lambda > 0.0 && lambda < 1.0))
    raise(ErrorCode::LoadOutOfRange, "load must lie in (0, 1)");
  std::vector<double> values{1.0, lambda};
  while (values.size() <= level_cap) {
    double prev = values.back();
    double next = lambda * prev * dist.pgf(prev);
    if (next < floor) break;
    values.push_back(next);
  }
  return {OccupancyState::validated(std::move(values)), lambda};
}

double mean_response_time(const EquilibriumPoint& eq) {
  return eq.values.tail_sum() / eq.lambda;
}

BoundsPair phase_transition_bounds(double lambda, const DegreeDistribution& dist,
                                   std::size_t level) {
  if (!(lambda > 0.0 && lambda < 1.0))
    raise(ErrorCode::LoadOutOfRange, "load must lie in (0, 1)");
  if (level < 2)
    raise(ErrorCode::DomainError, "bounds are defined for levels >= 2");
  std::uint32_t m = dist.min_support();  // throws NoFiniteSupport

  // lambda^outer * (lambda * base)^inner with
  // outer = (m+1)^(level-1), inner = ((m+1)^(level-1) - 1) / m for m > 0,
  // collapsing to outer = 1, inner = level - 1 at m = 0.
  double outer, inner;
  if (m == 0) {
    outer = 1.0;
    inner = double(level) - 1.0;
  } else {
    outer = std::pow(double(m) + 1.0, double(level) - 1.0);
    inner = (outer - 1.0) / double(m);
  }
  BoundsPair bounds;
  bounds.lower = std::pow(lambda, outer) * std::pow(lambda * dist.mass_at(m), inner);
  bounds.upper = std::pow(lambda, outer) *
                 std::pow(lambda * (1.0 - dist.mass_at_infinity()), inner);
  return bounds;
}

double optimal_lower_bound(double lambda, double mean_degree, std::size_t level) {
  if (!(lambda > 0.0 && lambda < 1.0))
    raise(ErrorCode::LoadOutOfRange, "load must lie in (0, 1)");
  if (mean_degree < 0.0)
    raise(ErrorCode::DomainError, "negative mean degree");
  if (mean_degree == 0.0) return std::pow(lambda, double(level));
  double exponent =
      (std::pow(mean_degree + 1.0, double(level)) - 1.0) / mean_degree;
  return std::pow(lambda, exponent);
}

ConvexityBoundCheck pgf_convexity_bounds(double c, const DegreeDistribution& dist,
                                         double mean_bound) {
  if (!(c > 0.0 && c < 1.0))
    raise(ErrorCode::DomainError, "evaluation point must lie in (0, 1)");
  if (mean_bound < 0.0)
    raise(ErrorCode::DomainError, "negative mean bound");
  double lower_int = std::floor(mean_bound);
  ConvexityBoundCheck check;
  check.pgf_value = dist.pgf(c);
  check.piecewise_bound = (lower_int + 1.0 - mean_bound) * std::pow(c, lower_int) +
                          (mean_bound - lower_int) * std::pow(c, lower_int + 1.0);
  check.power_bound = std::pow(c, mean_bound);
  return check;
}

OccupancyState small_ctmc_stationary(std::uint32_t n, double lambda_n,
                                     std::uint32_t queue_cap) {
  if (n < 1 || n > 3)
    raise(ErrorCode::DomainError, "exact chain supported for 1..3 servers");
  if (lambda_n < 0.0) raise(ErrorCode::DomainError, "negative arrival rate");
  if (queue_cap == 0) raise(ErrorCode::CapTooSmall, "queue cap must be positive");

  std::size_t levels = std::size_t(queue_cap) + 1;
  std::size_t state_count = 1;
  for (std::uint32_t u = 0; u < n; ++u) state_count *= levels;

  std::vector<std::size_t> stride(n);
  stride[0] = 1;
  for (std::uint32_t u = 1; u < n; ++u) stride[u] = stride[u - 1] * levels;

  auto digit = [&](std::size_t state, std::uint32_t u) {
    return (state / stride[u]) % levels;
  };

  // Columns hold outflows of one state; A = generator transposed.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(Eigen::Index(state_count),
                                            Eigen::Index(state_count));
  for (std::size_t s = 0; s < state_count; ++s) {
    double out_rate = 0.0;
    for (std::uint32_t u = 0; u < n; ++u) {
      if (digit(s, u) == 0) continue;
      a(Eigen::Index(s - stride[u]), Eigen::Index(s)) += 1.0;
      out_rate += 1.0;
    }
    if (lambda_n > 0.0) {
      std::uint32_t target = 0;
      for (std::uint32_t u = 1; u < n; ++u)
        if (digit(s, u) < digit(s, target)) target = u;
      if (digit(s, target) < queue_cap) {  // arrivals at the cap are dropped
        a(Eigen::Index(s + stride[target]), Eigen::Index(s)) += lambda_n;
        out_rate += lambda_n;
      }
    }
    a(Eigen::Index(s), Eigen::Index(s)) -= out_rate;
  }

  // Replace one balance equation (implied by the others) with normalization.
  for (std::size_t s = 0; s < state_count; ++s) a(0, Eigen::Index(s)) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(state_count));
  b(0) = 1.0;
  Eigen::VectorXd pi = a.partialPivLu().solve(b);

  double cap_mass = 0.0;
  for (std::size_t s = 0; s < state_count; ++s) {
    for (std::uint32_t u = 0; u < n; ++u) {
      if (digit(s, u) == queue_cap) {
        cap_mass += pi(Eigen::Index(s));
        break;
      }
    }
  }
  if (cap_mass > 1e-8)
    raise(ErrorCode::CapTooSmall,
          "stationary mass " + std::to_string(cap_mass) + " rests on the queue cap");

  std::vector<double> values(levels, 0.0);
  for (std::size_t s = 0; s < state_count; ++s) {
    double p = pi(Eigen::Index(s));
    for (std::uint32_t u = 0; u < n; ++u) {
      std::size_t len = digit(s, u);
      for (std::size_t i = 1; i <= len; ++i) values[i] += p / double(n);
    }
  }
  values[0] = 1.0;
  return OccupancyState::validated(std::move(values), 1e-9);
}

}  // namespace dynsq
