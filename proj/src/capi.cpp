#include "dynsq.h"

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynsq/config.hpp"
#include "dynsq/engine.hpp"
#include "dynsq/equilibrium.hpp"
#include "dynsq/fluid.hpp"
#include "dynsq/rng.hpp"
#include "json.hpp"

namespace {

thread_local std::string g_last_error;

dynsq_status map_code(dynsq::ErrorCode code) {
  using dynsq::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return DYNSQ_ERR_INVALID_ARGUMENT;
    case ErrorCode::NotAProbability: return DYNSQ_ERR_NOT_A_PROBABILITY;
    case ErrorCode::NegativeMass: return DYNSQ_ERR_NEGATIVE_MASS;
    case ErrorCode::InvalidLaw: return DYNSQ_ERR_INVALID_LAW;
    case ErrorCode::ConfigInvalid: return DYNSQ_ERR_CONFIG_INVALID;
    case ErrorCode::LoadOutOfRange: return DYNSQ_ERR_LOAD_OUT_OF_RANGE;
    case ErrorCode::DomainError: return DYNSQ_ERR_DOMAIN;
    case ErrorCode::StepTooLarge: return DYNSQ_ERR_STEP_TOO_LARGE;
    case ErrorCode::CapTooSmall: return DYNSQ_ERR_CAP_TOO_SMALL;
    case ErrorCode::EmptyLog: return DYNSQ_ERR_EMPTY_LOG;
    case ErrorCode::MismatchedGrids: return DYNSQ_ERR_MISMATCHED_GRIDS;
    case ErrorCode::NoFiniteSupport: return DYNSQ_ERR_NO_FINITE_SUPPORT;
    case ErrorCode::IoError: return DYNSQ_ERR_IO;
  }
  return DYNSQ_ERR_RUNTIME;
}

template <class F>
dynsq_status guarded(F&& body) noexcept {
  try {
    return body();
  } catch (const dynsq::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DYNSQ_ERR_OUT_OF_MEMORY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DYNSQ_ERR_RUNTIME;
  }
}

dynsq_status fail(dynsq_status status, const char* message) {
  g_last_error = message;
  return status;
}

dynsq_status export_string(const std::string& text, char** out) {
  char* buf = new (std::nothrow) char[text.size() + 1];
  if (!buf) return fail(DYNSQ_ERR_OUT_OF_MEMORY, "out of memory");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  *out = buf;
  return DYNSQ_OK;
}

}  // namespace

struct dynsq_dist {
  dynsq::DegreeDistribution value;
};

struct dynsq_equilibrium {
  dynsq::EquilibriumPoint value;
};

struct dynsq_run {
  dynsq::RunConfig config;
  std::vector<double> times;
  std::vector<dynsq::OccupancyState> states;
  std::size_t levels = 1;
  bool is_sim = false;
  dynsq::OccupancyState time_average;
  std::pair<double, double> window{0.0, 0.0};
  std::vector<dynsq::ServerTrack> tracks;
  std::optional<dynsq::CentralServerTrack> central;
  dynsq::SeparationDiagnostics diagnostics;
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  std::string summary;
};

namespace {

using Json = nlohmann::ordered_json;

std::vector<double> levels_row(const dynsq::OccupancyState& state,
                               std::size_t levels) {
  std::vector<double> row(levels, 0.0);
  for (std::size_t i = 0; i < levels; ++i) row[i] = state.value(i + 1);
  return row;
}

void finish_run(dynsq_run& run) {
  std::size_t levels = 1;
  for (const auto& state : run.states)
    levels = std::max(levels, state.max_level());
  if (run.is_sim) levels = std::max(levels, run.time_average.max_level());
  run.levels = levels;

  Json summary;
  summary["config"] = Json::parse(dynsq::config_echo_json(run.config));
  summary["levels"] = run.levels;
  summary["grid_len"] = run.times.size();
  if (run.is_sim) {
    summary["arrivals"] = run.arrivals;
    summary["departures"] = run.departures;
    summary["avg_window"] = {run.window.first, run.window.second};
    summary["time_average"] = levels_row(run.time_average, run.levels);
    Json diag;
    diag["max_gap"] = run.diagnostics.max_gap;
    diag["sigma"] = run.diagnostics.sigma;
    diag["resample_count"] = run.diagnostics.resample_count;
    diag["max_indegree"] = run.diagnostics.max_indegree;
    diag["interval_count"] = run.diagnostics.per_interval.size();
    summary["diagnostics"] = diag;
  }
  if (!run.states.empty())
    summary["final_state"] = levels_row(run.states.back(), run.levels);
  run.summary = summary.dump();
}

void adopt_trajectory(dynsq_run& run, dynsq::Trajectory&& traj) {
  run.is_sim = true;
  run.times = std::move(traj.times);
  run.states = std::move(traj.states);
  run.time_average = std::move(traj.time_average);
  run.window = traj.average_window;
  run.tracks = std::move(traj.server_tracks);
  run.central = std::move(traj.central);
  run.diagnostics = std::move(traj.diagnostics);
  run.arrivals = traj.arrival_count;
  run.departures = traj.departure_count;
}

dynsq_status make_run(const char* config_json, dynsq::RunConfig::Mode mode,
                      dynsq_run** out) {
  if (!config_json || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    auto run = std::make_unique<dynsq_run>();
    run->config = dynsq::parse_run_config(config_json, mode);
    const auto& cfg = run->config;
    switch (mode) {
      case dynsq::RunConfig::Mode::Simulate:
        adopt_trajectory(*run, dynsq::run_simulation(cfg.to_sim_config()));
        break;
      case dynsq::RunConfig::Mode::Baseline:
        adopt_trajectory(*run, dynsq::run_independent_baseline(
                                   cfg.n, cfg.lambda_n, cfg.horizon, cfg.seed,
                                   cfg.record_interval, cfg.average_window));
        break;
      case dynsq::RunConfig::Mode::PowerOfD:
        adopt_trajectory(*run, dynsq::run_power_of_d(
                                   cfg.n, cfg.lambda_n, *cfg.dist, cfg.horizon,
                                   cfg.seed, cfg.record_interval,
                                   cfg.average_window));
        break;
      case dynsq::RunConfig::Mode::Fluid: {
        dynsq::OccupancyState q0 =
            cfg.initial_occupancy.empty()
                ? dynsq::OccupancyState()
                : dynsq::OccupancyState::validated(cfg.initial_occupancy, 1e-9);
        double interval = cfg.record_interval > 0.0 ? cfg.record_interval
                                                    : cfg.horizon / 1000.0;
        auto stride = std::size_t(std::llround(interval / cfg.step));
        if (stride == 0) stride = 1;
        auto sol = dynsq::integrate_fluid(q0, cfg.lambda, *cfg.dist,
                                          cfg.horizon, cfg.step, stride);
        run->times = std::move(sol.times);
        run->states = std::move(sol.states);
        break;
      }
    }
    finish_run(*run);
    *out = run.release();
    return DYNSQ_OK;
  });
}

template <class T>
dynsq_status copy_buffer(const std::vector<T>& src, T* buf, size_t len) {
  if (!buf) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (len < src.size())
    return fail(DYNSQ_ERR_BUFFER_TOO_SMALL, "buffer too small");
  std::memcpy(buf, src.data(), src.size() * sizeof(T));
  return DYNSQ_OK;
}

}  // namespace

extern "C" {

const char* dynsq_version(void) { return "1.0.0"; }

const char* dynsq_status_name(dynsq_status status) {
  switch (status) {
    case DYNSQ_OK: return "ok";
    case DYNSQ_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DYNSQ_ERR_NOT_A_PROBABILITY: return "not_a_probability";
    case DYNSQ_ERR_NEGATIVE_MASS: return "negative_mass";
    case DYNSQ_ERR_INVALID_LAW: return "invalid_law";
    case DYNSQ_ERR_CONFIG_INVALID: return "config_invalid";
    case DYNSQ_ERR_LOAD_OUT_OF_RANGE: return "load_out_of_range";
    case DYNSQ_ERR_DOMAIN: return "domain_error";
    case DYNSQ_ERR_STEP_TOO_LARGE: return "step_too_large";
    case DYNSQ_ERR_CAP_TOO_SMALL: return "cap_too_small";
    case DYNSQ_ERR_EMPTY_LOG: return "empty_log";
    case DYNSQ_ERR_MISMATCHED_GRIDS: return "mismatched_grids";
    case DYNSQ_ERR_NO_FINITE_SUPPORT: return "no_finite_support";
    case DYNSQ_ERR_IO: return "io_error";
    case DYNSQ_ERR_NULL_POINTER: return "null_pointer";
    case DYNSQ_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    case DYNSQ_ERR_OUT_OF_MEMORY: return "out_of_memory";
    case DYNSQ_ERR_RUNTIME: return "runtime_error";
  }
  return "unknown";
}

const char* dynsq_last_error(void) { return g_last_error.c_str(); }

uint64_t dynsq_split_seed(uint64_t root, uint64_t stream, uint64_t counter) {
  return dynsq::mix_seed(root, stream, counter);
}

dynsq_status dynsq_dist_parse(const char* text, dynsq_dist** out) {
  if (!text || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = new dynsq_dist{dynsq::parse_degree_distribution(text)};
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_dist_create(const uint32_t* degrees, const double* masses,
                               size_t len, double mass_at_infinity,
                               dynsq_dist** out) {
  if (!out || (len > 0 && (!degrees || !masses)))
    return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    std::map<std::uint32_t, double> probs;
    for (size_t i = 0; i < len; ++i) probs[degrees[i]] += masses[i];
    *out = new dynsq_dist{
        dynsq::DegreeDistribution::validated(probs, mass_at_infinity)};
    return DYNSQ_OK;
  });
}

void dynsq_dist_free(dynsq_dist* dist) { delete dist; }

dynsq_status dynsq_dist_pgf(const dynsq_dist* dist, double x, double* out) {
  if (!dist || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = dist->value.pgf(x);
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_dist_pgf_derivative(const dynsq_dist* dist, double x,
                                       double* out) {
  if (!dist || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = dist->value.pgf_derivative(x);
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_dist_mean(const dynsq_dist* dist, double* out) {
  if (!dist || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = dist->value.finite_mean();
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_dist_format(const dynsq_dist* dist, char** out) {
  if (!dist || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    return export_string(dynsq::format_degree_distribution(dist->value), out);
  });
}

dynsq_status dynsq_equilibrium_compute(double lambda, const dynsq_dist* dist,
                                       dynsq_equilibrium** out) {
  if (!dist || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = new dynsq_equilibrium{dynsq::equilibrium_point(lambda, dist->value)};
    return DYNSQ_OK;
  });
}

void dynsq_equilibrium_free(dynsq_equilibrium* eq) { delete eq; }

size_t dynsq_equilibrium_len(const dynsq_equilibrium* eq) {
  return eq ? eq->value.values.max_level() + 1 : 0;
}

dynsq_status dynsq_equilibrium_copy_values(const dynsq_equilibrium* eq,
                                           double* buf, size_t len) {
  if (!eq || !buf) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  size_t needed = eq->value.values.max_level() + 1;
  if (len < needed) return fail(DYNSQ_ERR_BUFFER_TOO_SMALL, "buffer too small");
  for (size_t i = 0; i < needed; ++i) buf[i] = eq->value.values.value(i);
  return DYNSQ_OK;
}

dynsq_status dynsq_equilibrium_mean_response_time(const dynsq_equilibrium* eq,
                                                  double* out) {
  if (!eq || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = dynsq::mean_response_time(eq->value);
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_phase_transition_bounds(double lambda,
                                           const dynsq_dist* dist,
                                           uint32_t level, double* lower,
                                           double* upper) {
  if (!dist || !lower || !upper)
    return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    auto bounds = dynsq::phase_transition_bounds(lambda, dist->value, level);
    *lower = bounds.lower;
    *upper = bounds.upper;
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_optimal_lower_bound(double lambda, double mean_degree,
                                       uint32_t level, double* out) {
  if (!out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = dynsq::optimal_lower_bound(lambda, mean_degree, level);
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_finite_dispatch_tail(uint32_t n, double x,
                                        const dynsq_dist* dist, double* out) {
  if (!dist || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return guarded([&] {
    *out = dynsq::dispatch_tail_prob_finite(n, x, dist->value);
    return DYNSQ_OK;
  });
}

dynsq_status dynsq_run_simulation(const char* config_json, dynsq_run** out) {
  return make_run(config_json, dynsq::RunConfig::Mode::Simulate, out);
}

dynsq_status dynsq_run_fluid(const char* config_json, dynsq_run** out) {
  return make_run(config_json, dynsq::RunConfig::Mode::Fluid, out);
}

dynsq_status dynsq_run_baseline(const char* config_json, dynsq_run** out) {
  return make_run(config_json, dynsq::RunConfig::Mode::Baseline, out);
}

dynsq_status dynsq_run_power_of_d(const char* config_json, dynsq_run** out) {
  return make_run(config_json, dynsq::RunConfig::Mode::PowerOfD, out);
}

void dynsq_run_free(dynsq_run* run) { delete run; }

size_t dynsq_run_grid_len(const dynsq_run* run) {
  return run ? run->times.size() : 0;
}

size_t dynsq_run_level_count(const dynsq_run* run) {
  return run ? run->levels : 0;
}

dynsq_status dynsq_run_copy_times(const dynsq_run* run, double* buf,
                                  size_t len) {
  if (!run) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return copy_buffer(run->times, buf, len);
}

dynsq_status dynsq_run_copy_occupancy(const dynsq_run* run, size_t grid_index,
                                      double* buf, size_t len) {
  if (!run || !buf) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (grid_index >= run->states.size())
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "grid index out of range");
  if (len < run->levels)
    return fail(DYNSQ_ERR_BUFFER_TOO_SMALL, "buffer too small");
  const auto& state = run->states[grid_index];
  for (size_t i = 0; i < run->levels; ++i) buf[i] = state.value(i + 1);
  return DYNSQ_OK;
}

int dynsq_run_has_time_average(const dynsq_run* run) {
  return run && run->is_sim ? 1 : 0;
}

dynsq_status dynsq_run_copy_time_average(const dynsq_run* run, double* buf,
                                         size_t len) {
  if (!run || !buf) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (!run->is_sim)
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "run has no time average");
  if (len < run->levels)
    return fail(DYNSQ_ERR_BUFFER_TOO_SMALL, "buffer too small");
  for (size_t i = 0; i < run->levels; ++i)
    buf[i] = run->time_average.value(i + 1);
  return DYNSQ_OK;
}

dynsq_status dynsq_run_average_window(const dynsq_run* run, double* start,
                                      double* end) {
  if (!run || !start || !end)
    return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (!run->is_sim)
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "run has no averaging window");
  *start = run->window.first;
  *end = run->window.second;
  return DYNSQ_OK;
}

int dynsq_run_has_diagnostics(const dynsq_run* run) {
  return run && run->is_sim ? 1 : 0;
}

dynsq_status dynsq_run_diagnostics(const dynsq_run* run, double* max_gap,
                                   double* sigma, uint64_t* resample_count,
                                   uint64_t* max_indegree) {
  if (!run || !max_gap || !sigma || !resample_count || !max_indegree)
    return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (!run->is_sim)
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "run has no diagnostics");
  *max_gap = run->diagnostics.max_gap;
  *sigma = run->diagnostics.sigma;
  *resample_count = run->diagnostics.resample_count;
  *max_indegree = run->diagnostics.max_indegree;
  return DYNSQ_OK;
}

size_t dynsq_run_interval_count(const dynsq_run* run) {
  return run && run->is_sim ? run->diagnostics.per_interval.size() : 0;
}

dynsq_status dynsq_run_copy_intervals(const dynsq_run* run, uint64_t* arrivals,
                                      uint64_t* departures, size_t len) {
  if (!run || !arrivals || !departures)
    return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (!run->is_sim)
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "run has no diagnostics");
  const auto& intervals = run->diagnostics.per_interval;
  if (len < intervals.size())
    return fail(DYNSQ_ERR_BUFFER_TOO_SMALL, "buffer too small");
  for (size_t i = 0; i < intervals.size(); ++i) {
    arrivals[i] = intervals[i].arrivals;
    departures[i] = intervals[i].departures;
  }
  return DYNSQ_OK;
}

size_t dynsq_run_track_count(const dynsq_run* run) {
  return run ? run->tracks.size() : 0;
}

dynsq_status dynsq_run_track_server(const dynsq_run* run, size_t index,
                                    uint32_t* server) {
  if (!run || !server) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (index >= run->tracks.size())
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "track index out of range");
  *server = run->tracks[index].server;
  return DYNSQ_OK;
}

dynsq_status dynsq_run_copy_track(const dynsq_run* run, size_t index,
                                  uint32_t* buf, size_t len) {
  if (!run) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (index >= run->tracks.size())
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "track index out of range");
  return copy_buffer(run->tracks[index].lengths, buf, len);
}

int dynsq_run_has_central(const dynsq_run* run) {
  return run && run->central ? 1 : 0;
}

dynsq_status dynsq_run_copy_central(const dynsq_run* run, uint32_t* hub1,
                                    uint32_t* hub2, double* above_frac,
                                    size_t len) {
  if (!run || !hub1 || !hub2 || !above_frac)
    return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  if (!run->central)
    return fail(DYNSQ_ERR_INVALID_ARGUMENT, "run has no hub track");
  const auto& central = *run->central;
  if (len < central.hub1_lengths.size())
    return fail(DYNSQ_ERR_BUFFER_TOO_SMALL, "buffer too small");
  double n = double(run->config.n);
  for (size_t i = 0; i < central.hub1_lengths.size(); ++i) {
    hub1[i] = central.hub1_lengths[i];
    hub2[i] = central.hub2_lengths[i];
    above_frac[i] = double(central.above_central_count[i]) / n;
  }
  return DYNSQ_OK;
}

dynsq_status dynsq_run_summary_json(const dynsq_run* run, char** out) {
  if (!run || !out) return fail(DYNSQ_ERR_NULL_POINTER, "null pointer");
  return export_string(run->summary, out);
}

void dynsq_string_free(char* text) { delete[] text; }

}  // extern "C"
