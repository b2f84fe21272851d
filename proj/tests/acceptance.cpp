// Acceptance gate: one criterion per invocation (or "all"), one line of
// output per criterion, nonzero exit on any failure. Usage:
//   acceptance <path-to-cli> [criterion|all]
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynsq/config.hpp"
#include "dynsq/core.hpp"
#include "dynsq/engine.hpp"
#include "dynsq/equilibrium.hpp"
#include "dynsq/fluid.hpp"
#include "dynsq/graphs.hpp"
#include "dynsq/resampling.hpp"
#include "dynsq/rng.hpp"
#include "json.hpp"

using namespace dynsq;
using nlohmann::json;

namespace {

std::string g_cli;
std::filesystem::path g_dir;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note(what);
    }
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli + " " + args + " > " + (g_dir / "out.txt").string() +
                    " 2> " + (g_dir / "err.txt").string();
  int raw = std::system(cmd.c_str());
  return raw < 0 ? raw : WEXITSTATUS(raw);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  auto k = xs.size() / 2;
  return xs.size() % 2 ? xs[k] : 0.5 * (xs[k - 1] + xs[k]);
}

DegreeDistribution random_dist(Rng& rng, std::uint32_t max_degree,
                               double infinity_mass) {
  std::map<std::uint32_t, double> probs;
  auto atoms = 1 + rng.uniform_index(4);
  double total = 0;
  for (std::uint64_t a = 0; a < atoms; ++a) {
    auto d = std::uint32_t(rng.uniform_index(max_degree + 1));
    double w = rng.uniform01() + 0.05;
    probs[d] += w;
    total += w;
  }
  double scale = (1.0 - infinity_mass) / total;
  for (auto& [d, w] : probs) w *= scale;
  double sum = infinity_mass;
  for (auto& [d, w] : probs) sum += w;
  probs.begin()->second += 1.0 - sum;
  return DegreeDistribution::validated(probs, infinity_mass);
}

// ---- criterion 1: equilibrium tables through the CLI --------------------

Outcome criterion_1() {
  struct Row {
    const char* dist;
    double response;
    std::vector<double> tail;  // q*(1)..
  };
  const Row rows[] = {
      {"3:1", 1.7778, {0.9000, 0.5905, 0.1094, 0.0001}},
      {"2:1/3,3:1/3,4:1/3", 1.7941, {0.9000, 0.5927, 0.1214, 0.0006}},
      {"1:1/3,3:1/3,5:1/3", 1.8528, {0.9000, 0.5993, 0.1603, 0.0079}},
      {"0:1/3,3:1/3,6:1/3",
       2.0513,
       {0.9000, 0.6103, 0.2342, 0.0712, 0.0214, 0.0064}},
  };
  Outcome result;
  double worst = 0;
  for (const auto& row : rows) {
    auto out = g_dir / "c1.json";
    int code = run_cli(std::string("equilibrium --lambda 0.9 --dist '") +
                       row.dist + "' --imax 8 --out " + out.string());
    result.require(code == 0, std::string("CLI exit ") + std::to_string(code));
    if (!result.pass) return result;
    auto doc = json::parse(slurp(out));
    double dr = std::abs(double(doc["R"]) - row.response);
    worst = std::max(worst, dr);
    result.require(dr < 5e-5, std::string("R off by ") + fmt(dr) + " for " +
                                  row.dist);
    auto q = doc["q_star"];
    for (std::size_t i = 0; i < row.tail.size(); ++i) {
      double dq = std::abs(double(q[i + 1]) - row.tail[i]);
      worst = std::max(worst, dq);
      result.require(dq < 5e-5, std::string("q(") + std::to_string(i + 1) +
                                    ") off by " + fmt(dq) + " for " + row.dist);
    }
  }
  result.note("max table deviation " + fmt(worst));
  return result;
}

// ---- criterion 2: first equilibrium level is the load, bit for bit ------

Outcome criterion_2() {
  Outcome result;
  Rng rng(20251);
  for (int rep = 0; rep < 1000; ++rep) {
    double lambda = 0.01 + 0.98 * rng.uniform01();
    auto dist = random_dist(rng, 8, rep % 4 == 0 ? 0.3 * rng.uniform01() : 0.0);
    auto eq = equilibrium_point(lambda, dist);
    if (eq.values.value(1) != lambda) {
      result.require(false, "q*(1) != lambda at rep " + std::to_string(rep));
      return result;
    }
  }
  result.note("1000 pairs exact");
  return result;
}

// ---- criterion 3: the ODE settles onto the fixed point ------------------

Outcome criterion_3() {
  Outcome result;
  auto dists = {DegreeDistribution::point_mass(2),
                DegreeDistribution::validated({{0, 0.5}, {4, 0.5}})};
  auto empty = OccupancyState();
  auto plateau = OccupancyState::validated({1.0, 1.0, 1.0, 0.5});
  double worst = 0;
  for (const auto& dist : dists) {
    auto eq = equilibrium_point(0.9, dist, 1e-12);
    for (const auto& q0 : {empty, plateau}) {
      auto sol = integrate_fluid(q0, 0.9, dist, 200.0, 1e-3, 20000);
      double err = sol.states.back().l1_distance(eq.values);
      worst = std::max(worst, err);
      result.require(err < 1e-3, "l1 gap " + fmt(err));
    }
  }
  result.note("max l1 gap " + fmt(worst));
  return result;
}

// ---- criterion 4: order preservation along trajectories -----------------

Outcome criterion_4() {
  Outcome result;
  Rng rng(20254);
  double worst = 0;
  for (int rep = 0; rep < 50 && result.pass; ++rep) {
    double p_inf = rep % 5 == 0 ? 0.4 * rng.uniform01() : 0.0;
    auto dist = random_dist(rng, 6, p_inf);
    double lambda = 0.1 + 0.8 * rng.uniform01();

    std::vector<double> upper{1.0};
    double cur = 1.0;
    auto levels = 3 + rng.uniform_index(4);
    for (std::uint64_t i = 0; i < levels; ++i) {
      cur *= rng.uniform01();
      upper.push_back(cur);
    }
    std::vector<double> lower = upper;
    for (std::size_t i = 1; i < lower.size(); ++i)
      lower[i] *= rng.uniform01();
    for (std::size_t i = lower.size() - 1; i >= 2; --i)
      lower[i - 1] = std::max(lower[i - 1], lower[i]);

    auto hi = integrate_fluid(OccupancyState::validated(upper), lambda, dist,
                              10.0, 1e-3, 10);
    auto lo = integrate_fluid(OccupancyState::validated(lower), lambda, dist,
                              10.0, 1e-3, 10);
    for (std::size_t k = 0; k < hi.states.size() && result.pass; ++k) {
      auto top = std::max(hi.states[k].max_level(), lo.states[k].max_level());
      for (std::size_t i = 0; i <= top; ++i) {
        double gap = lo.states[k].value(i) - hi.states[k].value(i);
        worst = std::max(worst, gap);
        result.require(gap <= 1e-9, "order violated by " + fmt(gap) +
                                        " at rep " + std::to_string(rep));
      }
    }
  }
  result.note("50 pairs, worst crossing " + fmt(worst));
  return result;
}

// ---- criteria 5/6 shared machinery ---------------------------------------

// Triangles need a server count divisible by 3, so that topology runs one
// server short of the ring's 1000.
Trajectory dynamic_run(const std::string& topo, double horizon,
                       double record_interval, std::uint64_t seed,
                       std::optional<std::pair<double, double>> window) {
  SimConfig cfg;
  if (topo == "ring") {
    cfg.n = 1000;
    cfg.graph_law = GraphLaw::ring(cfg.n);
  } else {
    cfg.n = 999;
    cfg.graph_law = GraphLaw::disjoint_triangles(cfg.n);
  }
  cfg.lambda_n = 0.9 * cfg.n;
  cfg.schedule = ResamplingSchedule::poisson(std::log(std::log(double(cfg.n))));
  cfg.horizon = horizon;
  cfg.record_interval = record_interval;
  cfg.average_window = window;
  cfg.seed = seed;
  return run_simulation(cfg);
}

Outcome criterion_5() {
  Outcome result;
  auto dist = DegreeDistribution::point_mass(2);
  auto fluid = integrate_fluid(OccupancyState(), 0.9, dist, 10.0, 1e-3, 10);
  for (const std::string topo : {"ring", "triangles"}) {
    std::vector<std::vector<double>> sup(4);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto sim = dynamic_run(topo, 10.0, 0.01, seed, std::nullopt);
      if (sim.times.size() != fluid.times.size()) {
        result.require(false, "grid mismatch");
        return result;
      }
      for (std::size_t i = 1; i <= 4; ++i) {
        double worst = 0;
        for (std::size_t k = 0; k < sim.times.size(); ++k)
          worst = std::max(worst, std::abs(sim.states[k].value(i) -
                                           fluid.states[k].value(i)));
        sup[i - 1].push_back(worst);
      }
    }
    for (std::size_t i = 1; i <= 4; ++i) {
      double med = median_of(sup[i - 1]);
      result.require(med < 0.05, topo + " level " + std::to_string(i) +
                                     " median sup " + fmt(med));
      if (i == 1 || i == 4)
        result.note(topo + " q" + std::to_string(i) + " " + fmt(med));
    }
  }
  return result;
}

Outcome criterion_6() {
  Outcome result;
  auto eq = equilibrium_point(0.9, DegreeDistribution::point_mass(2));
  for (const std::string topo : {"ring", "triangles"}) {
    std::vector<std::vector<double>> dev(3);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto sim = dynamic_run(topo, 100.0, 0.1, seed, std::pair{50.0, 100.0});
      for (std::size_t i = 1; i <= 3; ++i)
        dev[i - 1].push_back(
            std::abs(sim.time_average.value(i) - eq.values.value(i)));
    }
    for (std::size_t i = 1; i <= 3; ++i) {
      double med = median_of(dev[i - 1]);
      result.require(med < 0.03, topo + " level " + std::to_string(i) +
                                     " median dev " + fmt(med));
      if (i == 3) result.note(topo + " q3 dev " + fmt(med));
    }
  }
  return result;
}

// ---- criterion 7: per-arrival resampling equals degree sampling ----------

Outcome criterion_7() {
  Outcome result;
  auto dist = DegreeDistribution::point_mass(2);
  std::vector<std::vector<double>> sim_avg(3), pod_avg(3);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SimConfig cfg;
    cfg.n = 1000;
    cfg.lambda_n = 900.0;
    cfg.graph_law = GraphLaw::configuration(1000, dist);
    cfg.schedule = ResamplingSchedule::every_k_arrivals(0);
    cfg.horizon = 100.0;
    cfg.seed = seed;
    auto sim = run_simulation(cfg);
    auto pod = run_power_of_d(1000, 900.0, dist, 100.0, seed);
    for (std::size_t i = 1; i <= 3; ++i) {
      sim_avg[i - 1].push_back(sim.time_average.value(i));
      pod_avg[i - 1].push_back(pod.time_average.value(i));
    }
  }
  for (std::size_t i = 1; i <= 3; ++i) {
    double gap =
        std::abs(median_of(sim_avg[i - 1]) - median_of(pod_avg[i - 1]));
    result.require(gap < 0.02,
                   "level " + std::to_string(i) + " gap " + fmt(gap));
    if (i == 2) result.note("q2 gap " + fmt(gap));
  }
  return result;
}

// ---- criterion 8: two servers against the exact chain --------------------

Outcome criterion_8() {
  Outcome result;
  auto exact = small_ctmc_stationary(2, 1.0, 25);
  std::vector<std::vector<double>> dev(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SimConfig cfg;
    cfg.n = 2;
    cfg.lambda_n = 1.0;
    cfg.graph_law = GraphLaw::complete(2);
    cfg.schedule = ResamplingSchedule::every_k_arrivals(0);
    cfg.horizon = 5000.0;
    cfg.record_interval = 5.0;
    cfg.seed = seed;
    auto sim = run_simulation(cfg);
    for (std::size_t i = 1; i <= 4; ++i)
      dev[i - 1].push_back(
          std::abs(sim.time_average.value(i) - exact.value(i)));
  }
  double worst = 0;
  for (std::size_t i = 1; i <= 4; ++i) {
    double med = median_of(dev[i - 1]);
    worst = std::max(worst, med);
    result.require(med < 0.02,
                   "level " + std::to_string(i) + " median dev " + fmt(med));
  }
  result.note("max median dev " + fmt(worst));
  return result;
}

// ---- criterion 9: sandwich and optimality suites --------------------------

Outcome criterion_9() {
  Outcome result;
  Rng rng(20259);
  for (int rep = 0; rep < 100 && result.pass; ++rep) {
    double p_inf = rep % 2 == 0 ? 0.0 : 0.5 * rng.uniform01();
    auto dist = random_dist(rng, 8, p_inf);
    double lambda = 0.05 + 0.9 * rng.uniform01();
    auto eq = equilibrium_point(lambda, dist);
    for (std::size_t level = 2; level <= 6; ++level) {
      auto bounds = phase_transition_bounds(lambda, dist, level);
      double q = eq.values.value(level);
      result.require(q >= bounds.lower - 1e-12,
                     "below lower bound at rep " + std::to_string(rep));
      result.require(q <= bounds.upper + 1e-12,
                     "above upper bound at rep " + std::to_string(rep));
    }
  }

  Rng rng2(20260);
  for (int rep = 0; rep < 100 && result.pass; ++rep) {
    std::uint32_t d = 1 + std::uint32_t(rng2.uniform_index(3));
    double lambda = 0.1 + 0.85 * rng2.uniform01();
    bool point = rep % 2 == 0;
    DegreeDistribution dist = DegreeDistribution::point_mass(d);
    if (!point) {
      switch (rng2.uniform_index(2)) {
        case 0:
          dist = DegreeDistribution::validated({{d - 1, 0.5}, {d + 1, 0.5}});
          break;
        default:
          dist = DegreeDistribution::validated({{0, 0.5}, {2 * d, 0.5}});
          break;
      }
    }
    auto eq = equilibrium_point(lambda, dist, 1e-12);
    if (point) {
      for (std::size_t level = 2; level <= 4; ++level) {
        double bound = optimal_lower_bound(lambda, double(d), level);
        result.require(std::abs(eq.values.value(level) - bound) <= 1e-12,
                       "point mass misses its own bound at rep " +
                           std::to_string(rep));
      }
    } else {
      double bound = optimal_lower_bound(lambda, double(d), 2);
      result.require(eq.values.value(2) > bound + 1e-12,
                     "spread law not strictly above at rep " +
                         std::to_string(rep));
      result.require(eq.values.value(2) >= bound - 1e-12,
                     "bound violated at rep " + std::to_string(rep));
    }
  }
  result.note("100 sandwich + 100 optimality cases");
  return result;
}

// ---- criterion 10: finite-n dispatch curve converges ----------------------

Outcome criterion_10() {
  Outcome result;
  auto dist = DegreeDistribution::point_mass(3);
  auto max_err = [&](std::uint64_t n) {
    double worst = 0;
    for (int k = 0; k <= 100; ++k) {
      double x = k / 100.0;
      worst = std::max(worst, std::abs(dispatch_tail_prob_finite(n, x, dist) -
                                       x * dist.pgf(x)));
    }
    return worst;
  };
  double e2 = max_err(100), e3 = max_err(1000), e4 = max_err(10000);
  result.require(e4 < 0.01, "err(1e4) = " + fmt(e4));
  result.require(e3 < e2, "not decreasing 1e2 -> 1e3");
  result.require(e4 < e3, "not decreasing 1e3 -> 1e4");
  result.note("err " + fmt(e2) + " -> " + fmt(e3) + " -> " + fmt(e4));
  return result;
}

// ---- criterion 11: static double star behaves like solo queues ------------

Outcome criterion_11() {
  Outcome result;
  SimConfig cfg;
  cfg.n = 500;
  cfg.lambda_n = 450.0;
  cfg.graph_law = GraphLaw::double_star(500);
  cfg.horizon = 200.0;
  cfg.average_window = std::pair{100.0, 200.0};
  cfg.seed = 1;
  auto sim = run_simulation(cfg);
  double worst = 0;
  for (std::size_t i = 1; i <= 3; ++i) {
    double gap =
        std::abs(sim.time_average.value(i) - std::pow(0.9, double(i)));
    worst = std::max(worst, gap);
    result.require(gap < 0.05,
                   "level " + std::to_string(i) + " off by " + fmt(gap));
  }
  result.note("max dev from geometric profile " + fmt(worst));
  return result;
}

// ---- criterion 12: bit-identical CLI reruns -------------------------------

Outcome criterion_12() {
  Outcome result;
  std::string config =
      R"('{"n":60,"load":0.9,"graph":"configuration","dist":"1:0.5,3:0.5",)"
      R"("schedule":"bounded_gap_uniform","mu":1.5,"horizon":20,)"
      R"("record_interval":0.25,"track_servers":[0,59],"seed":77}')";
  auto a = g_dir / "c12_a.csv";
  auto b = g_dir / "c12_b.csv";
  auto sa = g_dir / "c12_a.json";
  auto sb = g_dir / "c12_b.json";
  int code1 = run_cli("simulate --config " + config + " --out " + a.string() +
                      " --summary " + sa.string());
  int code2 = run_cli("simulate --config " + config + " --out " + b.string() +
                      " --summary " + sb.string());
  result.require(code1 == 0 && code2 == 0, "CLI failed");
  if (!result.pass) return result;
  auto bytes_a = slurp(a);
  result.require(!bytes_a.empty(), "empty output");
  result.require(bytes_a == slurp(b), "CSV bytes differ between reruns");
  result.require(slurp(sa) == slurp(sb), "summary bytes differ");
  result.note(std::to_string(bytes_a.size()) + " CSV bytes identical");
  return result;
}

struct Criterion {
  int id;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <path-to-cli> [criterion|all]\n");
    return 2;
  }
  g_cli = argv[1];
  std::string which = argc > 2 ? argv[2] : "all";
  g_dir = std::filesystem::temp_directory_path() / "dynsq_acceptance";
  std::filesystem::create_directories(g_dir);

  const Criterion criteria[] = {
      {1, 1.0, criterion_1},    {2, 1.0, criterion_2},
      {3, 30.0, criterion_3},   {4, 120.0, criterion_4},
      {5, 600.0, criterion_5},  {6, 900.0, criterion_6},
      {7, 600.0, criterion_7},  {8, 60.0, criterion_8},
      {9, 1.0, criterion_9},    {10, 1.0, criterion_10},
      {11, 300.0, criterion_11}, {12, 120.0, criterion_12},
  };

  bool all_pass = true;
  for (const auto& criterion : criteria) {
    if (which != "all" && which != std::to_string(criterion.id)) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > criterion.budget_seconds) {
      outcome.pass = false;
      outcome.note("over budget of " + fmt(criterion.budget_seconds) + "s");
    }
    std::printf("criterion %2d: %s (%.2fs)%s%s\n", criterion.id,
                outcome.pass ? "PASS" : "FAIL", elapsed,
                outcome.detail.empty() ? "" : " -- ",
                outcome.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
