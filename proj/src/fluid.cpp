#include "dynsq/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dynsq {

namespace {

constexpr double kBoundaryEps = 1e-9;   // q(i) counts as pinned at 1 above this
constexpr double kTailFloor = 1e-10;    // grow the tail while the last level exceeds this
constexpr double kProjectionTol = 1e-6; // projection beyond this means the step is too coarse

double tail_prob_raw(double qi, double qnext, double lambda,
                     const DegreeDistribution& dist) {
  double x = std::clamp(qi, 0.0, 1.0);
  double value = x * dist.pgf(x);
  double p_inf = dist.mass_at_infinity();
  if (p_inf > 0.0 && lambda > 0.0 && qi >= 1.0 - kBoundaryEps) {
    double overflow = p_inf - (1.0 - std::clamp(qnext, 0.0, 1.0)) / lambda;
    if (overflow > 0.0) value += overflow;
  }
  return value;
}

// d/dt of the tail values q(1..len), reading q(0) = 1 and q(len+1) = 0.
void rhs_raw(const std::vector<double>& tail, double lambda,
             const DegreeDistribution& dist, std::vector<double>& out) {
  std::size_t len = tail.size();
  out.resize(len);
  double a_prev = 1.0;
  for (std::size_t i = 0; i < len; ++i) {
    double qi = tail[i];
    double qnext = (i + 1 < len) ? tail[i + 1] : 0.0;
    double a_i = tail_prob_raw(qi, qnext, lambda, dist);
    out[i] = lambda * (a_prev - a_i) - (qi - qnext);
    a_prev = a_i;
  }
}

}  // namespace

double dispatch_tail_prob(const OccupancyState& q, std::size_t level,
                          double lambda, const DegreeDistribution& dist) {
  if (level == 0) return 1.0;
  return tail_prob_raw(q.value(level), q.value(level + 1), lambda, dist);
}

double dispatch_tail_prob_cases(const OccupancyState& q, std::size_t level,
                                double lambda, const DegreeDistribution& dist) {
  if (level == 0) return 1.0;
  std::size_t pinned = 0;  // largest level whose occupancy sits at 1
  while (pinned < q.max_level() && q.value(pinned + 1) >= 1.0 - kBoundaryEps)
    ++pinned;
  if (level < pinned) return 1.0;
  if (level == pinned && pinned > 0) {
    double spare = (1.0 - q.value(level + 1)) / lambda;
    return 1.0 - std::min(dist.mass_at_infinity(), spare);
  }
  double x = q.value(level);
  return x * dist.pgf(x);
}

std::vector<double> fluid_rhs(const OccupancyState& q, double lambda,
                              const DegreeDistribution& dist) {
  if (lambda < 0.0) raise(ErrorCode::DomainError, "negative load");
  std::vector<double> tail(q.values().begin() + 1, q.values().end());
  std::vector<double> out;
  rhs_raw(tail, lambda, dist, out);
  return out;
}

FluidSolution integrate_fluid(const OccupancyState& q0, double lambda,
                              const DegreeDistribution& dist, double horizon,
                              double step, std::size_t record_stride) {
  if (!(step > 0.0)) raise(ErrorCode::DomainError, "step must be positive");
  if (horizon < 0.0) raise(ErrorCode::DomainError, "negative horizon");
  if (lambda < 0.0 || lambda >= 1.0)
    raise(ErrorCode::LoadOutOfRange, "load must lie in [0, 1)");
  if (record_stride == 0) record_stride = 1;

  std::vector<double> tail(q0.values().begin() + 1, q0.values().end());
  auto total_steps = std::size_t(std::ceil(horizon / step - 1e-9));

  FluidSolution solution;
  solution.step = step;
  auto record = [&](std::size_t step_index) {
    std::vector<double> values;
    values.reserve(tail.size() + 1);
    values.push_back(1.0);
    values.insert(values.end(), tail.begin(), tail.end());
    solution.times.push_back(double(step_index) * step);
    solution.states.push_back(OccupancyState::validated(std::move(values)));
  };
  record(0);

  std::vector<double> k1, k2, k3, k4, scratch;
  for (std::size_t s = 1; s <= total_steps; ++s) {
    if (tail.empty() || tail.back() > kTailFloor) tail.push_back(0.0);

    std::size_t len = tail.size();
    auto stage = [&](const std::vector<double>& slope, double factor,
                     std::vector<double>& out_slope) {
      scratch.resize(len);
      for (std::size_t i = 0; i < len; ++i)
        scratch[i] = tail[i] + factor * slope[i];
      rhs_raw(scratch, lambda, dist, out_slope);
    };
    rhs_raw(tail, lambda, dist, k1);
    stage(k1, step / 2.0, k2);
    stage(k2, step / 2.0, k3);
    stage(k3, step, k4);

    double correction = 0.0;
    double prev = 1.0;
    for (std::size_t i = 0; i < len; ++i) {
      double v = tail[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      double projected = std::clamp(v, 0.0, prev);
      correction = std::max(correction, std::abs(projected - v));
      tail[i] = projected;
      prev = projected;
    }
    if (correction > kProjectionTol)
      raise(ErrorCode::StepTooLarge,
            "projection moved the state by " + std::to_string(correction) +
                "; reduce the step size");

    solution.max_level_used = std::max(solution.max_level_used, len);
    if (s % record_stride == 0 || s == total_steps) record(s);
  }
  return solution;
}

double uniform_subset_prob(std::uint64_t n, std::uint64_t d, double x) {
  if (!(x >= 0.0 && x <= 1.0)) raise(ErrorCode::DomainError, "x outside [0, 1]");
  if (d > n) return 0.0;
  double value = 1.0;
  double nx = double(n) * x;
  for (std::uint64_t m = 0; m < d; ++m) {
    double factor = (nx - double(m)) / double(n - m);
    if (factor <= 0.0) return 0.0;
    value *= std::min(factor, 1.0);
  }
  return value;
}

double dispatch_tail_prob_finite(std::uint64_t n, double x,
                                 const DegreeDistribution& dist) {
  if (n == 0) raise(ErrorCode::DomainError, "empty system");
  double value = 0.0;
  for (const auto& [degree, mass] : dist.support()) {
    if (degree > n - 1) continue;
    value += mass * uniform_subset_prob(n, degree + 1, x);
  }
  return value;
}

}  // namespace dynsq
