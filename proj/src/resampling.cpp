#include "dynsq/resampling.hpp"

#include <algorithm>
#include <cmath>

#include "dynsq/error.hpp"

namespace dynsq {

ResamplingSchedule ResamplingSchedule::every_k_arrivals(std::uint64_t kappa) {
  ResamplingSchedule s;
  s.kind = Kind::EveryKArrivals;
  s.kappa = kappa;
  s.rate = 0.0;
  return s;
}

ResamplingSchedule ResamplingSchedule::bounded_gap_deterministic(double rate) {
  return {Kind::BoundedGapDeterministic, 0, rate};
}

ResamplingSchedule ResamplingSchedule::bounded_gap_uniform(double rate) {
  return {Kind::BoundedGapUniform, 0, rate};
}

ResamplingSchedule ResamplingSchedule::poisson(double rate) {
  return {Kind::PoissonRenewal, 0, rate};
}

void ResamplingSchedule::validate() const {
  if (kind != Kind::EveryKArrivals && !(rate > 0.0))
    raise(ErrorCode::ConfigInvalid, "resampling rate must be positive");
}

std::optional<double> next_resampling_time(const ResamplingSchedule& schedule,
                                           double current_time,
                                           std::uint64_t /*arrivals_since_last*/,
                                           Rng& rng) {
  schedule.validate();
  switch (schedule.kind) {
    case ResamplingSchedule::Kind::EveryKArrivals:
      return std::nullopt;
    case ResamplingSchedule::Kind::BoundedGapDeterministic:
      return current_time + 1.0 / schedule.rate;
    case ResamplingSchedule::Kind::BoundedGapUniform:
      return current_time + rng.uniform_half_open(1.0 / schedule.rate);
    case ResamplingSchedule::Kind::PoissonRenewal:
      return current_time + rng.exponential(schedule.rate);
  }
  raise(ErrorCode::ConfigInvalid, "unknown resampling schedule");
}

namespace {

std::uint64_t count_in_interval(const std::vector<double>& times, double lo,
                                double hi) {
  // half-open on the left: (lo, hi]
  auto first = std::upper_bound(times.begin(), times.end(), lo);
  auto last = std::upper_bound(times.begin(), times.end(), hi);
  return std::uint64_t(last - first);
}

}  // namespace

SeparationDiagnostics compute_diagnostics(const EventLog& log,
                                          std::uint64_t max_indegree,
                                          std::uint32_t n, double horizon) {
  if (n == 0 || !(horizon > 0.0))
    raise(ErrorCode::EmptyLog, "diagnostics need servers and a positive horizon");

  std::vector<double> marks;  // 0 = sigma_0, then resamples within (0, horizon]
  marks.push_back(0.0);
  for (double t : log.resample_times) {
    if (t <= 0.0) continue;
    if (t > horizon) break;
    marks.push_back(t);
  }

  SeparationDiagnostics diag;
  diag.resample_count = marks.size() - 1;
  diag.max_indegree = max_indegree;

  for (std::size_t m = 0; m + 1 < marks.size(); ++m)
    diag.max_gap = std::max(diag.max_gap, marks[m + 1] - marks[m]);
  diag.max_gap = std::max(diag.max_gap, horizon - marks.back());

  double n2 = double(n) * double(n);
  double dplus1 = double(max_indegree) + 1.0;
  marks.push_back(horizon);  // closes the final partial interval
  diag.per_interval.reserve(marks.size() - 1);
  for (std::size_t m = 1; m < marks.size(); ++m) {
    IntervalCounts counts;
    counts.arrivals = count_in_interval(log.arrival_times, marks[m - 1], marks[m]);
    counts.departures = count_in_interval(log.departure_times, marks[m - 1], marks[m]);
    double a = double(counts.arrivals);
    double d = double(counts.departures);
    diag.sigma += (dplus1 * (a + d - 1.0) * a + a * a) / n2;
    diag.per_interval.push_back(counts);
  }
  return diag;
}

}  // namespace dynsq
