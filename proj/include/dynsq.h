/* C interface to the dynsq library. All functions returning dynsq_status
 * report failures through the return value; dynsq_last_error() carries a
 * thread-local message for the most recent failing call on this thread.
 * Objects returned through out-parameters are owned by the caller and must
 * be released with the matching *_free function. */
#ifndef DYNSQ_H
#define DYNSQ_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dynsq_status {
  DYNSQ_OK = 0,
  DYNSQ_ERR_INVALID_ARGUMENT = 1,
  DYNSQ_ERR_NOT_A_PROBABILITY = 2,
  DYNSQ_ERR_NEGATIVE_MASS = 3,
  DYNSQ_ERR_INVALID_LAW = 4,
  DYNSQ_ERR_CONFIG_INVALID = 5,
  DYNSQ_ERR_LOAD_OUT_OF_RANGE = 6,
  DYNSQ_ERR_DOMAIN = 7,
  DYNSQ_ERR_STEP_TOO_LARGE = 8,
  DYNSQ_ERR_CAP_TOO_SMALL = 9,
  DYNSQ_ERR_EMPTY_LOG = 10,
  DYNSQ_ERR_MISMATCHED_GRIDS = 11,
  DYNSQ_ERR_NO_FINITE_SUPPORT = 12,
  DYNSQ_ERR_IO = 13,
  DYNSQ_ERR_NULL_POINTER = 14,
  DYNSQ_ERR_BUFFER_TOO_SMALL = 15,
  DYNSQ_ERR_OUT_OF_MEMORY = 16,
  DYNSQ_ERR_RUNTIME = 17
} dynsq_status;

const char* dynsq_version(void);
const char* dynsq_status_name(dynsq_status status);

/* Message for the last failing call on the calling thread. Empty string when
 * no call has failed yet. The pointer stays valid until the next failure. */
const char* dynsq_last_error(void);

/* Deterministic seed derivation; replications of a run use
 * dynsq_split_seed(seed, DYNSQ_STREAM_REPLICATION, k). */
#define DYNSQ_STREAM_REPLICATION 5u
uint64_t dynsq_split_seed(uint64_t root, uint64_t stream, uint64_t counter);

/* ---- degree distributions ------------------------------------------- */

typedef struct dynsq_dist dynsq_dist;

/* Parses "d:mass" pairs separated by commas; masses may be fractions like
 * "1/3" and the key "inf" places mass at infinity. Masses must be
 * nonnegative and sum to one. */
dynsq_status dynsq_dist_parse(const char* text, dynsq_dist** out);
dynsq_status dynsq_dist_create(const uint32_t* degrees, const double* masses,
                               size_t len, double mass_at_infinity,
                               dynsq_dist** out);
void dynsq_dist_free(dynsq_dist* dist);

dynsq_status dynsq_dist_pgf(const dynsq_dist* dist, double x, double* out);
dynsq_status dynsq_dist_pgf_derivative(const dynsq_dist* dist, double x,
                                       double* out);
dynsq_status dynsq_dist_mean(const dynsq_dist* dist, double* out);
/* Canonical text form; release with dynsq_string_free. */
dynsq_status dynsq_dist_format(const dynsq_dist* dist, char** out);

/* ---- equilibrium and bounds ------------------------------------------ */

typedef struct dynsq_equilibrium dynsq_equilibrium;

/* Mean-field equilibrium occupancy for load 0 < lambda < 1. */
dynsq_status dynsq_equilibrium_compute(double lambda, const dynsq_dist* dist,
                                       dynsq_equilibrium** out);
void dynsq_equilibrium_free(dynsq_equilibrium* eq);

/* Number of levels with positive mass, counting level 0. */
size_t dynsq_equilibrium_len(const dynsq_equilibrium* eq);
/* Copies q(0), q(1), ... into buf (len slots required). */
dynsq_status dynsq_equilibrium_copy_values(const dynsq_equilibrium* eq,
                                           double* buf, size_t len);
dynsq_status dynsq_equilibrium_mean_response_time(const dynsq_equilibrium* eq,
                                                  double* out);

/* Sandwich bounds on the equilibrium tail at `level` >= 2. */
dynsq_status dynsq_phase_transition_bounds(double lambda,
                                           const dynsq_dist* dist,
                                           uint32_t level, double* lower,
                                           double* upper);
/* Smallest achievable q*(level) among degree laws with the given mean. */
dynsq_status dynsq_optimal_lower_bound(double lambda, double mean_degree,
                                       uint32_t level, double* out);
/* Probability that a size-(d+1) closed neighborhood of a uniformly chosen
 * server among n lands inside the fraction x of least-loaded servers,
 * averaged over the degree law. */
dynsq_status dynsq_finite_dispatch_tail(uint32_t n, double x,
                                        const dynsq_dist* dist, double* out);

/* ---- runs ------------------------------------------------------------ */

/* A completed run: a trajectory on a uniform time grid plus summary data.
 * Occupancy rows hold q(1..K) with K = dynsq_run_level_count(); q(0) is
 * always 1 and is omitted. */
typedef struct dynsq_run dynsq_run;

/* Each takes a flat JSON config (see README) and runs to the horizon. */
dynsq_status dynsq_run_simulation(const char* config_json, dynsq_run** out);
dynsq_status dynsq_run_fluid(const char* config_json, dynsq_run** out);
dynsq_status dynsq_run_baseline(const char* config_json, dynsq_run** out);
dynsq_status dynsq_run_power_of_d(const char* config_json, dynsq_run** out);
void dynsq_run_free(dynsq_run* run);

size_t dynsq_run_grid_len(const dynsq_run* run);
size_t dynsq_run_level_count(const dynsq_run* run);
dynsq_status dynsq_run_copy_times(const dynsq_run* run, double* buf,
                                  size_t len);
/* Occupancy q(1..K) at one grid point; len must be the level count. */
dynsq_status dynsq_run_copy_occupancy(const dynsq_run* run, size_t grid_index,
                                      double* buf, size_t len);

/* Time-averaged occupancy over the averaging window (simulation runs only). */
int dynsq_run_has_time_average(const dynsq_run* run);
dynsq_status dynsq_run_copy_time_average(const dynsq_run* run, double* buf,
                                         size_t len);
dynsq_status dynsq_run_average_window(const dynsq_run* run, double* start,
                                      double* end);

/* Resampling diagnostics (simulation runs only). */
int dynsq_run_has_diagnostics(const dynsq_run* run);
dynsq_status dynsq_run_diagnostics(const dynsq_run* run, double* max_gap,
                                   double* sigma, uint64_t* resample_count,
                                   uint64_t* max_indegree);
size_t dynsq_run_interval_count(const dynsq_run* run);
/* Arrival and departure counts per inter-resampling interval. */
dynsq_status dynsq_run_copy_intervals(const dynsq_run* run, uint64_t* arrivals,
                                      uint64_t* departures, size_t len);

/* Per-server queue-length tracks sampled on the grid. */
size_t dynsq_run_track_count(const dynsq_run* run);
dynsq_status dynsq_run_track_server(const dynsq_run* run, size_t index,
                                    uint32_t* server);
dynsq_status dynsq_run_copy_track(const dynsq_run* run, size_t index,
                                  uint32_t* buf, size_t len);

/* Hub observables of double-star runs, one entry per grid point. */
int dynsq_run_has_central(const dynsq_run* run);
dynsq_status dynsq_run_copy_central(const dynsq_run* run, uint32_t* hub1,
                                    uint32_t* hub2, double* above_frac,
                                    size_t len);

/* JSON summary: config echo, counts, time averages, diagnostics. Release
 * with dynsq_string_free. */
dynsq_status dynsq_run_summary_json(const dynsq_run* run, char** out);

void dynsq_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* DYNSQ_H */
