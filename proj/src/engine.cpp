// Event-driven simulation of n single-server queues with
// join-shortest-neighborhood dispatch over a periodically resampled graph.
//
// Arrivals form a Poisson process of total rate lambda_n and land on a
// uniform server, which forwards the task to the least-loaded server of its
// closed out-neighborhood in the graph currently in force. Departures occur
// at rate equal to the number of busy servers, the departing server uniform
// among them. Timed resampling schedules keep a pending redraw time; the
// arrival-counting schedule redraws immediately after the triggering arrival
// has been dispatched, so that arrival still sees the old graph.

#include "dynsq/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

namespace dynsq {

namespace {

constexpr double kGridEps = 1e-9;
constexpr std::uint64_t kSpotCheckPeriod = 10000;

std::uint32_t pick_least_loaded(const std::vector<std::uint32_t>& lengths,
                                std::uint32_t first,
                                std::span<const std::uint32_t> rest,
                                TieBreak tie_break, Rng* rng) {
  std::uint32_t best = first;
  std::uint32_t best_len = lengths[first];
  std::uint64_t ties = 1;
  for (std::uint32_t v : rest) {
    std::uint32_t len = lengths[v];
    if (len < best_len) {
      best = v;
      best_len = len;
      ties = 1;
    } else if (len == best_len) {
      if (tie_break == TieBreak::SmallestIndex) {
        if (v < best) best = v;
      } else {
        ++ties;
        if (rng->uniform_index(ties) == 0) best = v;
      }
    }
  }
  return best;
}

enum class DispatchMode { Graph, UniformChoices, SelfOnly };

struct CoreParams {
  DispatchMode mode = DispatchMode::Graph;
  std::uint32_t n = 0;
  double lambda_n = 0.0;
  double horizon = 0.0;
  double record_interval = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  std::uint64_t seed = 1;
  TieBreak tie_break = TieBreak::SmallestIndex;
  const GraphLaw* law = nullptr;                       // Graph
  const ResamplingSchedule* schedule = nullptr;        // Graph, null = static
  const DegreeDistribution* choice_dist = nullptr;     // UniformChoices
  const std::vector<std::uint32_t>* initial = nullptr;
  const std::vector<std::uint32_t>* track_servers = nullptr;
  bool track_central = false;
};

class Simulation {
 public:
  explicit Simulation(const CoreParams& p)
      : p_(p),
        event_rng_(mix_seed(p.seed, streams::events)),
        schedule_rng_(mix_seed(p.seed, streams::schedule)) {}

  Trajectory run();

 private:
  void seed_queues();
  void resample_graph();
  void locate_hubs();
  void advance_to(double t_new);
  void record_grid_point();
  void apply_arrival(std::uint32_t v);
  void apply_departure(std::uint32_t v);
  std::uint32_t dispatch(std::uint32_t u);
  std::uint32_t draw_choice_degree();
  std::uint32_t dispatch_uniform_choices();
  void spot_check() const;

  const CoreParams& p_;
  Rng event_rng_;
  Rng schedule_rng_;
  std::uint64_t graph_counter_ = 0;

  double t_ = 0.0;
  std::vector<std::uint32_t> x_;
  std::vector<std::uint32_t> busy_;
  std::vector<std::uint32_t> busy_pos_;
  std::vector<std::uint64_t> at_least_;  // at_least_[i] = #{u : x_ >= i}
  std::uint64_t total_tasks_ = 0;
  std::uint64_t event_counter_ = 0;

  std::optional<GraphSnapshot> graph_;
  std::uint32_t hub1_ = 0, hub2_ = 0;

  EventLog log_;
  std::uint64_t max_indegree_seen_ = 0;

  double grid_interval_ = 0.0;
  std::size_t grid_points_ = 0;
  std::size_t next_grid_ = 0;

  std::vector<double> window_acc_;
  Trajectory out_;
  std::vector<std::uint8_t> tracked_;
  std::vector<std::uint32_t> choice_scratch_;
};

void Simulation::seed_queues() {
  x_.assign(p_.n, 0u);
  if (p_.initial && !p_.initial->empty()) x_ = *p_.initial;
  busy_pos_.assign(p_.n, std::uint32_t(-1));
  at_least_.assign(1, p_.n);
  for (std::uint32_t u = 0; u < p_.n; ++u) {
    std::uint32_t len = x_[u];
    total_tasks_ += len;
    if (len > 0) {
      busy_pos_[u] = std::uint32_t(busy_.size());
      busy_.push_back(u);
    }
    if (len >= at_least_.size()) at_least_.resize(len + 1, 0);
    for (std::uint32_t i = 1; i <= len; ++i) ++at_least_[i];
  }
}

void Simulation::resample_graph() {
  Rng graph_rng(mix_seed(p_.seed, streams::graph, graph_counter_++));
  graph_ = sample_graph(*p_.law, graph_rng);
  max_indegree_seen_ =
      std::max<std::uint64_t>(max_indegree_seen_, max_indegree(*graph_));
  if (p_.track_central) locate_hubs();
}

void Simulation::locate_hubs() {
  hub1_ = hub2_ = std::uint32_t(-1);
  for (std::uint32_t u = 0; u < p_.n; ++u) {
    if (graph_->outdegree(u) == p_.n - 1) {
      if (hub1_ == std::uint32_t(-1)) {
        hub1_ = u;
      } else {
        hub2_ = u;
        break;
      }
    }
  }
  if (hub2_ == std::uint32_t(-1))
    throw std::logic_error("double-star sample without two hubs");
}

void Simulation::record_grid_point() {
  double n = double(p_.n);
  std::vector<double> values(at_least_.size());
  values[0] = 1.0;
  for (std::size_t i = 1; i < at_least_.size(); ++i)
    values[i] = double(at_least_[i]) / n;
  out_.times.push_back(double(next_grid_) * grid_interval_);
  out_.states.push_back(OccupancyState::validated(std::move(values)));
  for (auto& track : out_.server_tracks) track.lengths.push_back(x_[track.server]);
  if (out_.central) {
    std::uint32_t l1 = x_[hub1_], l2 = x_[hub2_];
    out_.central->hub1_lengths.push_back(l1);
    out_.central->hub2_lengths.push_back(l2);
    std::uint64_t above = at_least_[std::min<std::size_t>(std::min(l1, l2),
                                                          at_least_.size() - 1)];
    out_.central->above_central_count.push_back(std::uint32_t(above));
  }
}

void Simulation::advance_to(double t_new) {
  auto [w0, w1] = p_.window;
  double lo = std::max(t_, w0), hi = std::min(t_new, w1);
  if (hi > lo) {
    double dt = hi - lo;
    if (window_acc_.size() < at_least_.size()) window_acc_.resize(at_least_.size(), 0.0);
    for (std::size_t i = 1; i < at_least_.size(); ++i)
      window_acc_[i] += dt * double(at_least_[i]);
  }
  while (next_grid_ < grid_points_ &&
         double(next_grid_) * grid_interval_ <= t_new + kGridEps) {
    record_grid_point();
    ++next_grid_;
  }
  t_ = t_new;
}

void Simulation::apply_arrival(std::uint32_t v) {
  std::uint32_t len = x_[v]++;
  ++total_tasks_;
  if (len + 1 >= at_least_.size()) at_least_.push_back(0);
  ++at_least_[len + 1];
  if (len == 0) {
    busy_pos_[v] = std::uint32_t(busy_.size());
    busy_.push_back(v);
  }
  log_.arrival_times.push_back(t_);
}

void Simulation::apply_departure(std::uint32_t v) {
  std::uint32_t len = x_[v]--;
  --total_tasks_;
  --at_least_[len];
  while (at_least_.size() > 1 && at_least_.back() == 0) at_least_.pop_back();
  if (len == 1) {
    std::uint32_t pos = busy_pos_[v];
    std::uint32_t last = busy_.back();
    busy_[pos] = last;
    busy_pos_[last] = pos;
    busy_.pop_back();
    busy_pos_[v] = std::uint32_t(-1);
  }
  log_.departure_times.push_back(t_);
}

std::uint32_t Simulation::dispatch(std::uint32_t u) {
  switch (p_.mode) {
    case DispatchMode::Graph:
      return pick_least_loaded(x_, u, graph_->out_neighbors(u), p_.tie_break,
                               &event_rng_);
    case DispatchMode::UniformChoices:
      return dispatch_uniform_choices();
    case DispatchMode::SelfOnly:
      return u;
  }
  return u;
}

std::uint32_t Simulation::draw_choice_degree() {
  double u = event_rng_.uniform01();
  double acc = 0.0;
  for (const auto& [degree, mass] : p_.choice_dist->support()) {
    acc += mass;
    if (u < acc) return std::min(degree, p_.n - 1);
  }
  return p_.n - 1;  // infinity atom
}

std::uint32_t Simulation::dispatch_uniform_choices() {
  std::uint32_t k = draw_choice_degree() + 1;  // k distinct candidates
  auto& picks = choice_scratch_;
  picks.clear();
  if (k > p_.n / 2) {
    picks.resize(p_.n);
    for (std::uint32_t v = 0; v < p_.n; ++v) picks[v] = v;
    for (std::uint32_t i = 0; i < k; ++i) {
      auto j = std::uint32_t(event_rng_.uniform_index(p_.n - i)) + i;
      std::swap(picks[i], picks[j]);
    }
    picks.resize(k);
  } else {
    while (picks.size() < k) {
      auto v = std::uint32_t(event_rng_.uniform_index(p_.n));
      if (std::find(picks.begin(), picks.end(), v) == picks.end())
        picks.push_back(v);
    }
  }
  return pick_least_loaded(x_, picks[0], {picks.data() + 1, picks.size() - 1},
                           p_.tie_break, &event_rng_);
}

void Simulation::spot_check() const {
  std::uint64_t busy_count = 0, total = 0;
  std::vector<std::uint64_t> recount(at_least_.size(), 0);
  for (std::uint32_t u = 0; u < p_.n; ++u) {
    std::uint32_t len = x_[u];
    total += len;
    if (len > 0) ++busy_count;
    if (len >= recount.size())
      throw std::logic_error("occupancy bookkeeping lost a level");
    for (std::uint32_t i = 1; i <= len; ++i) ++recount[i];
  }
  recount[0] = p_.n;
  if (total != total_tasks_ || busy_count != busy_.size() || recount != at_least_)
    throw std::logic_error("occupancy bookkeeping diverged from queue state");
}

Trajectory Simulation::run() {
  seed_queues();
  grid_interval_ =
      p_.record_interval > 0.0 ? p_.record_interval : p_.horizon / 1000.0;
  grid_points_ = std::size_t(std::floor(p_.horizon / grid_interval_ + kGridEps)) + 1;

  if (p_.track_servers) {
    for (std::uint32_t s : *p_.track_servers)
      out_.server_tracks.push_back({s, {}});
  }
  if (p_.track_central) out_.central.emplace();
  out_.average_window = p_.window;

  if (p_.mode == DispatchMode::Graph) resample_graph();

  bool arrival_triggered = false;
  std::uint64_t kappa = 0;
  std::optional<double> pending_resample;
  if (p_.mode == DispatchMode::Graph && p_.schedule) {
    if (p_.schedule->kind == ResamplingSchedule::Kind::EveryKArrivals) {
      arrival_triggered = true;
      kappa = p_.schedule->kappa;
    } else {
      pending_resample = next_resampling_time(*p_.schedule, 0.0, 0, schedule_rng_);
    }
  }
  std::uint64_t arrivals_since_resample = 0;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (;;) {
    double rate = p_.lambda_n + double(busy_.size());
    double t_event = rate > 0.0 ? t_ + event_rng_.exponential(rate) : kInf;

    if (pending_resample && *pending_resample <= t_event &&
        *pending_resample <= p_.horizon) {
      advance_to(*pending_resample);
      resample_graph();
      log_.resample_times.push_back(t_);
      pending_resample = next_resampling_time(*p_.schedule, t_, 0, schedule_rng_);
      continue;
    }
    if (t_event > p_.horizon) {
      advance_to(p_.horizon);
      break;
    }
    advance_to(t_event);

    if (event_rng_.uniform01() * rate < p_.lambda_n) {
      auto u = std::uint32_t(event_rng_.uniform_index(p_.n));
      apply_arrival(dispatch(u));
      if (arrival_triggered && ++arrivals_since_resample == kappa + 1) {
        resample_graph();
        log_.resample_times.push_back(t_);
        arrivals_since_resample = 0;
      }
    } else {
      apply_departure(busy_[event_rng_.uniform_index(busy_.size())]);
    }
    if (++event_counter_ % kSpotCheckPeriod == 0) spot_check();
  }

  auto [w0, w1] = p_.window;
  double denom = double(p_.n) * (w1 - w0);
  std::vector<double> avg(window_acc_.size(), 0.0);
  if (avg.empty()) avg.resize(1);
  avg[0] = 1.0;
  for (std::size_t i = 1; i < window_acc_.size(); ++i)
    avg[i] = window_acc_[i] / denom;
  out_.time_average = OccupancyState::validated(std::move(avg), 1e-9);

  out_.arrival_count = log_.arrival_times.size();
  out_.departure_count = log_.departure_times.size();
  out_.diagnostics =
      compute_diagnostics(log_, max_indegree_seen_, p_.n, p_.horizon);
  return out_;
}

std::pair<double, double> resolve_window(
    const std::optional<std::pair<double, double>>& window, double horizon) {
  if (!window) return {horizon / 2.0, horizon};
  return *window;
}

void validate_common(std::uint32_t n, double lambda_n, double horizon,
                     double record_interval,
                     const std::pair<double, double>& window) {
  if (n == 0) raise(ErrorCode::ConfigInvalid, "need at least one server");
  if (lambda_n < 0.0) raise(ErrorCode::ConfigInvalid, "negative arrival rate");
  if (!(horizon > 0.0)) raise(ErrorCode::ConfigInvalid, "horizon must be positive");
  if (record_interval < 0.0)
    raise(ErrorCode::ConfigInvalid, "negative record interval");
  if (!(window.first >= 0.0 && window.first < window.second &&
        window.second <= horizon + kGridEps))
    raise(ErrorCode::ConfigInvalid, "averaging window must be ordered inside the run");
}

}  // namespace

void SimConfig::validate() const {
  auto window = resolve_window(average_window, horizon);
  validate_common(n, lambda_n, horizon, record_interval, window);
  try {
    graph_law.validate();
  } catch (const Error& e) {
    raise(ErrorCode::ConfigInvalid, e.what());
  }
  if (graph_law.n != n)
    raise(ErrorCode::ConfigInvalid, "graph law sized for a different server count");
  if (schedule) {
    try {
      schedule->validate();
    } catch (const Error& e) {
      raise(ErrorCode::ConfigInvalid, e.what());
    }
  }
  if (!initial_queues.empty() && initial_queues.size() != n)
    raise(ErrorCode::ConfigInvalid, "initial queue vector must have one entry per server");
  for (std::uint32_t s : track_servers)
    if (s >= n) raise(ErrorCode::ConfigInvalid, "tracked server out of range");
  if (track_central && graph_law.kind != GraphLaw::Kind::DoubleStar)
    raise(ErrorCode::ConfigInvalid, "central tracking needs the double-star law");
}

std::uint32_t dispatch_target(const QueueVector& queues,
                              const GraphSnapshot& graph, std::uint32_t server) {
  Rng unused(0);
  return pick_least_loaded(queues.lengths, server, graph.out_neighbors(server),
                           TieBreak::SmallestIndex, &unused);
}

std::uint32_t dispatch_target(const QueueVector& queues,
                              const GraphSnapshot& graph, std::uint32_t server,
                              TieBreak tie_break, Rng& rng) {
  return pick_least_loaded(queues.lengths, server, graph.out_neighbors(server),
                           tie_break, &rng);
}

Trajectory run_simulation(const SimConfig& config) {
  config.validate();
  CoreParams p;
  p.mode = DispatchMode::Graph;
  p.n = config.n;
  p.lambda_n = config.lambda_n;
  p.horizon = config.horizon;
  p.record_interval = config.record_interval;
  p.window = resolve_window(config.average_window, config.horizon);
  p.seed = config.seed;
  p.tie_break = config.tie_break;
  p.law = &config.graph_law;
  p.schedule = config.schedule ? &*config.schedule : nullptr;
  p.initial = &config.initial_queues;
  p.track_servers = &config.track_servers;
  p.track_central = config.track_central;
  return Simulation(p).run();
}

Trajectory run_independent_baseline(
    std::uint32_t n, double lambda_n, double horizon, std::uint64_t seed,
    double record_interval, std::optional<std::pair<double, double>> average_window) {
  CoreParams p;
  p.mode = DispatchMode::SelfOnly;
  p.n = n;
  p.lambda_n = lambda_n;
  p.horizon = horizon;
  p.record_interval = record_interval;
  p.window = resolve_window(average_window, horizon);
  p.seed = seed;
  validate_common(n, lambda_n, horizon, record_interval, p.window);
  return Simulation(p).run();
}

Trajectory run_power_of_d(std::uint32_t n, double lambda_n,
                          const DegreeDistribution& dist, double horizon,
                          std::uint64_t seed, double record_interval,
                          std::optional<std::pair<double, double>> average_window) {
  CoreParams p;
  p.mode = DispatchMode::UniformChoices;
  p.n = n;
  p.lambda_n = lambda_n;
  p.horizon = horizon;
  p.record_interval = record_interval;
  p.window = resolve_window(average_window, horizon);
  p.seed = seed;
  p.choice_dist = &dist;
  validate_common(n, lambda_n, horizon, record_interval, p.window);
  return Simulation(p).run();
}

}  // namespace dynsq
