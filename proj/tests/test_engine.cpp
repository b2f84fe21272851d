#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "dynsq/engine.hpp"
#include "dynsq/equilibrium.hpp"
#include "dynsq/error.hpp"
#include "dynsq/graphs.hpp"
#include "dynsq/resampling.hpp"
#include "dynsq/rng.hpp"
#include "helpers.hpp"

using namespace dynsq;

namespace {

double tail_average(const Trajectory& out, std::size_t level) {
  return level <= out.time_average.max_level()
             ? out.time_average.value(level)
             : 0.0;
}

double total_tail(const Trajectory& out) {
  double sum = 0;
  for (std::size_t i = 1; i <= out.time_average.max_level(); ++i)
    sum += out.time_average.value(i);
  return sum;
}

SimConfig ring_config(std::uint32_t n, double lambda_n, double horizon,
                      std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.lambda_n = lambda_n;
  cfg.graph_law = GraphLaw::ring(n);
  cfg.schedule = ResamplingSchedule::poisson(1.0);
  cfg.horizon = horizon;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("dispatch goes to the shortest visible queue") {
  Rng rng(1);
  auto complete3 = sample_graph(GraphLaw::complete(3), rng);
  QueueVector q{{2, 0, 1}};
  CHECK(dispatch_target(q, complete3, 0) == 1);

  QueueVector tie{{1, 0, 0}};
  CHECK(dispatch_target(tie, complete3, 0) == 1);  // smallest index wins

  GraphSnapshot isolated(3, {0, 0, 0, 0}, {});
  QueueVector any{{5, 0, 0}};
  CHECK(dispatch_target(any, isolated, 0) == 0);  // no neighbours: stay local
}

TEST_CASE("uniform tie-break spreads ties evenly") {
  Rng graph_rng(2);
  auto complete3 = sample_graph(GraphLaw::complete(3), graph_rng);
  QueueVector flat{{0, 0, 0}};
  Rng rng(7);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 3000; ++i)
    ++counts[dispatch_target(flat, complete3, 0, TieBreak::UniformRandom, rng)];
  for (int c : counts) CHECK(std::abs(c - 1000) < 150);
  // The smallest-index rule never consumes randomness.
  Rng untouched(7);
  auto before = untouched.next_u64();
  Rng still(7);
  CHECK(dispatch_target(flat, complete3, 0, TieBreak::SmallestIndex, still) ==
        0);
  CHECK(still.next_u64() == before);
}

TEST_CASE("no arrivals means an empty system forever") {
  auto cfg = ring_config(12, 0.0, 25.0, 3);
  auto out = run_simulation(cfg);
  CHECK(out.arrival_count == 0);
  for (const auto& state : out.states) {
    CHECK(state.value(0) == 1.0);
    CHECK(state.max_level() == 0);
  }
}

TEST_CASE("single server reproduces the busy fraction") {
  std::vector<double> deviations;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig cfg;
    cfg.n = 1;
    cfg.lambda_n = 0.5;
    cfg.graph_law = GraphLaw::complete(1);
    cfg.horizon = 50000.0;
    cfg.seed = seed;
    auto out = run_simulation(cfg);
    deviations.push_back(std::abs(tail_average(out, 1) - 0.5));
  }
  CHECK(median_of(deviations) < 0.02);
}

TEST_CASE("identical configs give identical trajectories") {
  auto cfg = ring_config(20, 18.0, 5.0, 11);
  cfg.track_servers = {0, 7};
  auto a = run_simulation(cfg);
  auto b = run_simulation(cfg);
  REQUIRE(a.times == b.times);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t k = 0; k < a.states.size(); ++k)
    CHECK(a.states[k] == b.states[k]);
  CHECK(a.time_average == b.time_average);
  CHECK(a.arrival_count == b.arrival_count);
  CHECK(a.departure_count == b.departure_count);
  CHECK(a.diagnostics.sigma == b.diagnostics.sigma);
  CHECK(a.diagnostics.max_gap == b.diagnostics.max_gap);
  REQUIRE(a.server_tracks.size() == 2);
  CHECK(a.server_tracks[0].lengths == b.server_tracks[0].lengths);

  auto cfg2 = cfg;
  cfg2.seed = 12;
  auto c = run_simulation(cfg2);
  CHECK(c.arrival_count != a.arrival_count);
}

TEST_CASE("event counts balance the final backlog") {
  auto cfg = ring_config(30, 24.0, 15.0, 5);
  auto out = run_simulation(cfg);
  double backlog = 30.0 * out.states.back().tail_sum();
  CHECK(double(out.arrival_count - out.departure_count) ==
        doctest::Approx(backlog).epsilon(1e-9));
}

TEST_CASE("initial queue lengths are honoured") {
  SimConfig cfg;
  cfg.n = 4;
  cfg.lambda_n = 0.0;
  cfg.graph_law = GraphLaw::complete(4);
  cfg.horizon = 1.0;
  cfg.initial_queues = {3, 1, 0, 2};
  cfg.seed = 2;
  auto out = run_simulation(cfg);
  const auto& first = out.states.front();
  CHECK(first.value(1) == doctest::Approx(0.75));
  CHECK(first.value(2) == doctest::Approx(0.5));
  CHECK(first.value(3) == doctest::Approx(0.25));
  CHECK(out.arrival_count == 0);
  CHECK(out.departure_count <= 6);
}

TEST_CASE("independent baseline approaches the geometric profile") {
  std::vector<std::vector<double>> dev(3);
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    auto out = run_independent_baseline(500, 450.0, 400.0, seed, 5.0,
                                        std::pair{200.0, 400.0});
    for (std::size_t i = 1; i <= 3; ++i)
      dev[i - 1].push_back(
          std::abs(tail_average(out, i) - std::pow(0.9, double(i))));
  }
  for (auto& level : dev) CHECK(median_of(level) < 0.02);
}

TEST_CASE("baseline at half load keeps half the servers busy") {
  auto out = run_independent_baseline(200, 100.0, 200.0, 4);
  CHECK(std::abs(tail_average(out, 1) - 0.5) < 0.02);
}

TEST_CASE("baseline with no load stays empty") {
  auto out = run_independent_baseline(50, 0.0, 10.0, 1);
  CHECK(out.arrival_count == 0);
  CHECK(out.states.back().max_level() == 0);
}

TEST_CASE("degree-zero sampling is uniform routing") {
  std::vector<double> deviations;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto out = run_power_of_d(500, 450.0, DegreeDistribution::point_mass(0),
                              400.0, seed, 5.0, std::pair{200.0, 400.0});
    deviations.push_back(std::abs(tail_average(out, 1) - 0.9));
  }
  CHECK(median_of(deviations) < 0.02);
}

TEST_CASE("degree-one sampling is the classical two-choice scheme") {
  auto out = run_power_of_d(1000, 900.0, DegreeDistribution::point_mass(1),
                            100.0, 1, 1.0, std::pair{50.0, 100.0});
  CHECK(std::abs(tail_average(out, 2) - std::pow(0.9, 3.0)) < 0.03);
}

TEST_CASE("power-of-d with no load stays empty") {
  auto out =
      run_power_of_d(50, 0.0, DegreeDistribution::point_mass(2), 10.0, 1);
  CHECK(out.arrival_count == 0);
  CHECK(out.states.back().max_level() == 0);
}

TEST_CASE("per-arrival resampling matches degree sampling, small scale") {
  // Scaled-down smoke test of the statistical equivalence; the full-size
  // version runs in the acceptance suite.
  SimConfig cfg;
  cfg.n = 300;
  cfg.lambda_n = 270.0;
  cfg.graph_law =
      GraphLaw::configuration(300, DegreeDistribution::point_mass(2));
  cfg.schedule = ResamplingSchedule::every_k_arrivals(0);
  cfg.horizon = 200.0;
  cfg.average_window = std::pair{100.0, 200.0};
  cfg.seed = 9;
  auto resampled = run_simulation(cfg);
  auto sampled = run_power_of_d(300, 270.0, DegreeDistribution::point_mass(2),
                                200.0, 9, 0.0, std::pair{100.0, 200.0});
  for (std::size_t i = 1; i <= 3; ++i)
    CHECK(std::abs(tail_average(resampled, i) - tail_average(sampled, i)) <
          0.03);
}

TEST_CASE("pooled queues never hold more work than independent ones") {
  auto cfg = ring_config(300, 270.0, 100.0, 6);
  auto pooled = run_simulation(cfg);
  auto solo = run_independent_baseline(300, 270.0, 100.0, 6);
  CHECK(total_tail(pooled) <= total_tail(solo) + 0.02);
}

TEST_CASE("server tracks follow the recording grid") {
  auto cfg = ring_config(15, 10.0, 8.0, 13);
  cfg.record_interval = 0.5;
  cfg.track_servers = {3, 14};
  auto out = run_simulation(cfg);
  REQUIRE(out.server_tracks.size() == 2);
  CHECK(out.server_tracks[0].server == 3);
  CHECK(out.server_tracks[1].server == 14);
  for (const auto& track : out.server_tracks) {
    REQUIRE(track.lengths.size() == out.times.size());
    CHECK(track.lengths.front() == 0);
  }
}

TEST_CASE("hub tracking on the double star") {
  SimConfig cfg;
  cfg.n = 12;
  cfg.lambda_n = 6.0;
  cfg.graph_law = GraphLaw::double_star(12);
  cfg.horizon = 10.0;
  cfg.track_central = true;
  cfg.seed = 21;
  auto out = run_simulation(cfg);
  REQUIRE(out.central.has_value());
  REQUIRE(out.central->hub1_lengths.size() == out.times.size());
  REQUIRE(out.central->hub2_lengths.size() == out.times.size());
  REQUIRE(out.central->above_central_count.size() == out.times.size());
  CHECK(out.central->above_central_count.front() == 12);
  for (auto c : out.central->above_central_count) CHECK(c <= 12);

  auto bad = ring_config(12, 6.0, 10.0, 21);
  bad.track_central = true;
  CHECK_ERROR_CODE(run_simulation(bad), ErrorCode::ConfigInvalid);
}

TEST_CASE("configuration validation rejects inconsistent setups") {
  SimConfig cfg;
  cfg.n = 0;
  cfg.lambda_n = 1.0;
  cfg.graph_law = GraphLaw::ring(3);
  cfg.horizon = 1.0;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::ConfigInvalid);

  auto mismatched = ring_config(10, 5.0, 1.0, 1);
  mismatched.graph_law = GraphLaw::ring(12);
  CHECK_ERROR_CODE(mismatched.validate(), ErrorCode::ConfigInvalid);

  auto negative = ring_config(10, -1.0, 1.0, 1);
  CHECK_ERROR_CODE(negative.validate(), ErrorCode::ConfigInvalid);

  auto no_time = ring_config(10, 5.0, 0.0, 1);
  CHECK_ERROR_CODE(no_time.validate(), ErrorCode::ConfigInvalid);

  auto short_init = ring_config(10, 5.0, 1.0, 1);
  short_init.initial_queues = {1, 2};
  CHECK_ERROR_CODE(short_init.validate(), ErrorCode::ConfigInvalid);

  auto bad_window = ring_config(10, 5.0, 1.0, 1);
  bad_window.average_window = std::pair{0.8, 0.2};
  CHECK_ERROR_CODE(bad_window.validate(), ErrorCode::ConfigInvalid);

  auto bad_track = ring_config(10, 5.0, 1.0, 1);
  bad_track.track_servers = {10};
  CHECK_ERROR_CODE(bad_track.validate(), ErrorCode::ConfigInvalid);
}

TEST_CASE("uniform tie rule produces a valid run") {
  auto cfg = ring_config(30, 20.0, 20.0, 8);
  cfg.tie_break = TieBreak::UniformRandom;
  auto out = run_simulation(cfg);
  CHECK(out.arrival_count > 200);
  for (const auto& state : out.states)
    for (std::size_t i = 1; i <= state.max_level(); ++i)
      REQUIRE(state.value(i) <= state.value(i - 1) + 1e-12);
}

}  // TEST_SUITE
