#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dynsq/rng.hpp"

namespace dynsq {

/// When the interaction graph is redrawn.
struct ResamplingSchedule {
  enum class Kind {
    EveryKArrivals,          // immediately after each (kappa+1)-th arrival
    BoundedGapDeterministic, // fixed gap 1/rate
    BoundedGapUniform,       // gap uniform in (0, 1/rate]
    PoissonRenewal,          // exponential gaps, rate `rate`
  };

  Kind kind = Kind::PoissonRenewal;
  std::uint64_t kappa = 0;  // EveryKArrivals
  double rate = 1.0;        // the timed kinds

  static ResamplingSchedule every_k_arrivals(std::uint64_t kappa);
  static ResamplingSchedule bounded_gap_deterministic(double rate);
  static ResamplingSchedule bounded_gap_uniform(double rate);
  static ResamplingSchedule poisson(double rate);

  void validate() const;
};

/// Next resampling time after `current_time`, or nullopt when resampling is
/// triggered by arrival counts rather than a clock.
std::optional<double> next_resampling_time(const ResamplingSchedule& schedule,
                                           double current_time,
                                           std::uint64_t arrivals_since_last,
                                           Rng& rng);

/// Timestamped record of one run, enough to reconstruct the per-interval
/// event counts between consecutive resamplings.
struct EventLog {
  std::vector<double> arrival_times;    // nondecreasing
  std::vector<double> departure_times;  // nondecreasing
  std::vector<double> resample_times;   // nondecreasing, excludes time zero
};

struct IntervalCounts {
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
};

/// Separation diagnostics over [0, horizon]. `max_gap` is the longest time
/// any sampled graph stayed in force; `sigma` is the scaled event-weight sum
/// whose smallness certifies that resampling decouples the graph from the
/// queue state. Interval m covers (sigma_{m-1}, sigma_m] with time zero as
/// sigma_0 and the horizon closing the final (possibly partial) interval.
struct SeparationDiagnostics {
  double max_gap = 0.0;
  double sigma = 0.0;
  std::vector<IntervalCounts> per_interval;
  std::uint64_t resample_count = 0;
  std::uint64_t max_indegree = 0;
};

/// Computes the diagnostics from an event log. `max_indegree` is the
/// in-degree bound of the sampled graphs. Throws EmptyLog when the horizon
/// is not positive or n is zero.
SeparationDiagnostics compute_diagnostics(const EventLog& log,
                                          std::uint64_t max_indegree,
                                          std::uint32_t n, double horizon);

}  // namespace dynsq
