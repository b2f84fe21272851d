#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dynsq/core.hpp"
#include "dynsq/graphs.hpp"
#include "dynsq/resampling.hpp"

namespace dynsq {

enum class TieBreak {
  SmallestIndex,  // deterministic, matches the reference construction
  UniformRandom,
};

struct SimConfig {
  std::uint32_t n = 0;
  double lambda_n = 0.0;  // total arrival rate; zero allowed
  GraphLaw graph_law;
  // nullopt = static: one graph sampled at time zero, never redrawn.
  std::optional<ResamplingSchedule> schedule;
  double horizon = 0.0;
  // Empty = start with every queue empty; otherwise one length per server.
  std::vector<std::uint32_t> initial_queues;
  double record_interval = 0.0;  // 0 picks horizon / 1000
  std::vector<std::uint32_t> track_servers;
  bool track_central = false;  // hub tracks, DoubleStar law only
  TieBreak tie_break = TieBreak::SmallestIndex;
  // Time-average window; nullopt = second half [horizon/2, horizon].
  std::optional<std::pair<double, double>> average_window;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigInvalid
};

/// Queue length of one server sampled at the recording grid.
struct ServerTrack {
  std::uint32_t server = 0;
  std::vector<std::uint32_t> lengths;  // one per grid point
};

/// Hub observables for double-star runs, one entry per grid point. hub1 is
/// the lower-indexed hub of the graph in force at that time.
struct CentralServerTrack {
  std::vector<std::uint32_t> hub1_lengths;
  std::vector<std::uint32_t> hub2_lengths;
  // Number of servers holding at least min(hub1, hub2) tasks.
  std::vector<std::uint32_t> above_central_count;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<OccupancyState> states;  // one per grid point
  OccupancyState time_average;         // over the averaging window
  std::pair<double, double> average_window{0.0, 0.0};
  std::vector<ServerTrack> server_tracks;
  std::optional<CentralServerTrack> central;
  SeparationDiagnostics diagnostics;
  std::uint64_t arrival_count = 0;
  std::uint64_t departure_count = 0;
};

/// Target of a task arriving at `server`: the least-loaded of the server and
/// its out-neighbors, lowest index on ties.
std::uint32_t dispatch_target(const QueueVector& queues,
                              const GraphSnapshot& graph, std::uint32_t server);

/// Same with a configurable tie rule; UniformRandom consumes rng draws only
/// when ties occur.
std::uint32_t dispatch_target(const QueueVector& queues,
                              const GraphSnapshot& graph, std::uint32_t server,
                              TieBreak tie_break, Rng& rng);

/// Event-driven simulation of n single-server queues under
/// join-shortest-neighborhood dispatch over a (re)sampled graph.
/// Deterministic given the config, including the seed.
Trajectory run_simulation(const SimConfig& config);

/// n independent M/M/1 queues at per-server load lambda_n / n: dispatch
/// ignores neighbors entirely.
Trajectory run_independent_baseline(std::uint32_t n, double lambda_n,
                                    double horizon, std::uint64_t seed,
                                    double record_interval = 0.0,
                                    std::optional<std::pair<double, double>>
                                        average_window = std::nullopt);

/// Graph-free dispatch: each arrival draws d from `dist` and joins the
/// shortest of d+1 servers picked uniformly without replacement. Degrees are
/// clamped to n-1; the infinity atom means "sample all servers".
Trajectory run_power_of_d(std::uint32_t n, double lambda_n,
                          const DegreeDistribution& dist, double horizon,
                          std::uint64_t seed, double record_interval = 0.0,
                          std::optional<std::pair<double, double>>
                              average_window = std::nullopt);

}  // namespace dynsq
