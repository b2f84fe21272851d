// Command-line front end. Talks to the library exclusively through the C
// API in dynsq.h; trajectories land in CSV, everything else in JSON.
#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "dynsq.h"
#include "json.hpp"

namespace {

using Json = nlohmann::ordered_json;

struct RunDeleter {
  void operator()(dynsq_run* run) const { dynsq_run_free(run); }
};
using RunPtr = std::unique_ptr<dynsq_run, RunDeleter>;

struct DistDeleter {
  void operator()(dynsq_dist* dist) const { dynsq_dist_free(dist); }
};
using DistPtr = std::unique_ptr<dynsq_dist, DistDeleter>;

int status_to_exit(dynsq_status status) {
  switch (status) {
    case DYNSQ_OK:
      return 0;
    case DYNSQ_ERR_INVALID_ARGUMENT:
    case DYNSQ_ERR_NOT_A_PROBABILITY:
    case DYNSQ_ERR_NEGATIVE_MASS:
    case DYNSQ_ERR_INVALID_LAW:
    case DYNSQ_ERR_CONFIG_INVALID:
    case DYNSQ_ERR_LOAD_OUT_OF_RANGE:
    case DYNSQ_ERR_DOMAIN:
    case DYNSQ_ERR_NO_FINITE_SUPPORT:
      return 2;
    default:
      return 3;
  }
}

int report_failure(dynsq_status status) {
  std::fprintf(stderr, "error (%s): %s\n", dynsq_status_name(status),
               dynsq_last_error());
  return status_to_exit(status);
}

void append_double(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, res.ptr);
}

bool write_file(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return true;
  }
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), std::streamsize(content.size()));
  return bool(out);
}

bool read_config_text(const std::string& source, std::string& out) {
  if (!source.empty() && source.front() == '{') {
    out = source;
    return true;
  }
  if (source == "-") {
    out.assign(std::istreambuf_iterator<char>(std::cin), {});
    return true;
  }
  std::ifstream in(source, std::ios::binary);
  if (!in) return false;
  out.assign(std::istreambuf_iterator<char>(in), {});
  return true;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  auto slash = path.find_last_of('/');
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string run_to_csv(const dynsq_run* run) {
  size_t grid = dynsq_run_grid_len(run);
  size_t levels = dynsq_run_level_count(run);
  std::vector<double> times(grid);
  dynsq_run_copy_times(run, times.data(), grid);

  size_t track_count = dynsq_run_track_count(run);
  std::vector<uint32_t> track_servers(track_count);
  std::vector<std::vector<uint32_t>> tracks(track_count);
  for (size_t j = 0; j < track_count; ++j) {
    dynsq_run_track_server(run, j, &track_servers[j]);
    tracks[j].resize(grid);
    dynsq_run_copy_track(run, j, tracks[j].data(), grid);
  }

  bool has_central = dynsq_run_has_central(run) != 0;
  std::vector<uint32_t> hub1, hub2;
  std::vector<double> above;
  if (has_central) {
    hub1.resize(grid);
    hub2.resize(grid);
    above.resize(grid);
    dynsq_run_copy_central(run, hub1.data(), hub2.data(), above.data(), grid);
  }

  std::string csv = "t";
  for (size_t i = 1; i <= levels; ++i) csv += ",q" + std::to_string(i);
  for (size_t j = 0; j < track_count; ++j)
    csv += ",s" + std::to_string(track_servers[j]);
  if (has_central) csv += ",hub1_len,hub2_len,above_central_frac";
  csv += "\n";

  std::vector<double> row(levels);
  for (size_t i = 0; i < grid; ++i) {
    append_double(csv, times[i]);
    dynsq_run_copy_occupancy(run, i, row.data(), levels);
    for (double v : row) {
      csv.push_back(',');
      append_double(csv, v);
    }
    for (size_t j = 0; j < track_count; ++j)
      csv += "," + std::to_string(tracks[j][i]);
    if (has_central) {
      csv += "," + std::to_string(hub1[i]) + "," + std::to_string(hub2[i]);
      csv.push_back(',');
      append_double(csv, above[i]);
    }
    csv.push_back('\n');
  }
  return csv;
}

std::string run_summary(const dynsq_run* run) {
  char* text = nullptr;
  if (dynsq_run_summary_json(run, &text) != DYNSQ_OK) return "{}";
  std::string out = text;
  dynsq_string_free(text);
  return out;
}

using RunFn = dynsq_status (*)(const char*, dynsq_run**);

struct RunArgs {
  std::string config;
  std::string out;
  std::string summary;
  std::uint64_t replications = 1;
  std::uint64_t jobs = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_command(RunFn runner, const RunArgs& args) {
  std::string config_text;
  if (!read_config_text(args.config, config_text)) {
    std::fprintf(stderr, "cannot read config '%s'\n", args.config.c_str());
    return 2;
  }

  Json config;
  try {
    config = Json::parse(config_text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config is not valid JSON: %s\n", e.what());
    return 2;
  }
  if (!config.is_object()) {
    std::fprintf(stderr, "config must be a JSON object\n");
    return 2;
  }
  if (args.seed_set) config["seed"] = args.seed;

  if (args.replications <= 1) {
    dynsq_run* raw = nullptr;
    dynsq_status status = runner(config.dump().c_str(), &raw);
    if (status != DYNSQ_OK) return report_failure(status);
    RunPtr run(raw);
    if (!write_file(args.out, run_to_csv(run.get()))) {
      std::fprintf(stderr, "cannot write '%s'\n", args.out.c_str());
      return 3;
    }
    if (!args.summary.empty()) {
      if (!write_file(args.summary, run_summary(run.get()) + "\n")) {
        std::fprintf(stderr, "cannot write '%s'\n", args.summary.c_str());
        return 3;
      }
    } else if (!args.out.empty()) {
      std::string summary = run_summary(run.get()) + "\n";
      std::fwrite(summary.data(), 1, summary.size(), stdout);
    }
    return 0;
  }

  if (args.out.empty()) {
    std::fprintf(stderr, "--replications needs --out\n");
    return 2;
  }
  std::uint64_t base_seed = args.seed_set ? args.seed
                            : config.contains("seed")
                                ? config["seed"].get<std::uint64_t>()
                                : 1;

  std::atomic<std::uint64_t> next{0};
  std::atomic<int> failure{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      std::uint64_t k = next.fetch_add(1);
      if (k >= args.replications || failure.load() != 0) return;
      Json local = config;
      local["seed"] = dynsq_split_seed(base_seed, DYNSQ_STREAM_REPLICATION, k);
      dynsq_run* raw = nullptr;
      dynsq_status status = runner(local.dump().c_str(), &raw);
      if (status != DYNSQ_OK) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "replication %llu: error (%s): %s\n",
                     static_cast<unsigned long long>(k),
                     dynsq_status_name(status), dynsq_last_error());
        int expect = 0;
        failure.compare_exchange_strong(expect, status_to_exit(status));
        return;
      }
      RunPtr run(raw);
      std::string suffix = "_r" + std::to_string(k);
      bool ok = write_file(with_suffix(args.out, suffix), run_to_csv(run.get()));
      if (ok && !args.summary.empty())
        ok = write_file(with_suffix(args.summary, suffix),
                        run_summary(run.get()) + "\n");
      if (!ok) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "replication %llu: cannot write output\n",
                     static_cast<unsigned long long>(k));
        int expect = 0;
        failure.compare_exchange_strong(expect, 3);
        return;
      }
    }
  };

  std::uint64_t thread_count = std::min(args.jobs, args.replications);
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return failure.load();
}

int equilibrium_command(double lambda, const std::string& dist_text,
                        std::uint32_t imax, const std::string& out_path) {
  dynsq_dist* dist_raw = nullptr;
  dynsq_status status = dynsq_dist_parse(dist_text.c_str(), &dist_raw);
  if (status != DYNSQ_OK) return report_failure(status);
  DistPtr dist(dist_raw);

  dynsq_equilibrium* eq = nullptr;
  status = dynsq_equilibrium_compute(lambda, dist.get(), &eq);
  if (status != DYNSQ_OK) return report_failure(status);

  size_t len = dynsq_equilibrium_len(eq);
  std::vector<double> values(len);
  dynsq_equilibrium_copy_values(eq, values.data(), len);
  double mean_response = 0.0;
  dynsq_equilibrium_mean_response_time(eq, &mean_response);
  dynsq_equilibrium_free(eq);

  size_t top = imax > 0 ? imax : len - 1;
  values.resize(top + 1, 0.0);

  char* canonical = nullptr;
  dynsq_dist_format(dist.get(), &canonical);
  Json report;
  report["lambda"] = lambda;
  report["dist"] = canonical ? canonical : dist_text.c_str();
  dynsq_string_free(canonical);
  report["q_star"] = values;
  report["R"] = mean_response;
  Json bounds = Json::object();
  for (uint32_t level = 2; level <= top; ++level) {
    double lower = 0.0, upper = 0.0;
    if (dynsq_phase_transition_bounds(lambda, dist.get(), level, &lower,
                                      &upper) != DYNSQ_OK)
      break;
    bounds[std::to_string(level)] = {lower, upper};
  }
  report["bounds"] = bounds;
  if (!write_file(out_path, report.dump() + "\n")) {
    std::fprintf(stderr, "cannot write '%s'\n", out_path.c_str());
    return 3;
  }
  return 0;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // column-major
  size_t rows = 0;
};

bool read_csv(const std::string& path, CsvTable& table, std::string& error) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    error = "cannot read '" + path + "'";
    return false;
  }
  std::string line;
  if (!std::getline(in, line)) {
    error = "'" + path + "' is empty";
    return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.header.push_back(cell);
  table.columns.resize(table.header.size());

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t col = 0, pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      auto end = comma == std::string::npos ? line.size() : comma;
      if (col >= table.columns.size()) {
        error = "'" + path + "' has a row wider than its header";
        return false;
      }
      double value = 0.0;
      auto res = std::from_chars(line.data() + pos, line.data() + end, value);
      if (res.ec != std::errc() || res.ptr != line.data() + end) {
        error = "'" + path + "' has a malformed number";
        return false;
      }
      table.columns[col].push_back(value);
      ++col;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (col != table.columns.size()) {
      error = "'" + path + "' has a short row";
      return false;
    }
    ++table.rows;
  }
  if (table.rows == 0) {
    error = "'" + path + "' has no data rows";
    return false;
  }
  return true;
}

int find_column(const CsvTable& table, const std::string& name) {
  for (size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == name) return int(i);
  return -1;
}

size_t nearest_index(const std::vector<double>& times, double t) {
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  if (it == times.end()) return times.size() - 1;
  size_t hi = size_t(it - times.begin());
  return (t - times[hi - 1] <= times[hi] - t) ? hi - 1 : hi;
}

int compare_command(const std::string& path_a, const std::string& path_b,
                    const std::vector<std::string>& wanted, double tolerance,
                    bool tolerance_set, const std::string& out_path) {
  CsvTable a, b;
  std::string error;
  if (!read_csv(path_a, a, error) || !read_csv(path_b, b, error)) {
    std::fprintf(stderr, "%s\n", error.c_str());
    return 3;
  }
  int ta = find_column(a, "t"), tb = find_column(b, "t");
  if (ta < 0 || tb < 0) {
    std::fprintf(stderr, "both files need a 't' column\n");
    return 3;
  }
  const auto& times_a = a.columns[size_t(ta)];
  const auto& times_b = b.columns[size_t(tb)];

  auto spacing = [](const std::vector<double>& times) {
    return times.size() > 1
               ? (times.back() - times.front()) / double(times.size() - 1)
               : 0.0;
  };
  double slack = 1.5 * std::max(spacing(times_a), spacing(times_b)) + 1e-12;
  if (std::abs(times_a.back() - times_b.back()) > slack) {
    std::fprintf(stderr,
                 "mismatched grids: horizons %g and %g differ by more than a "
                 "grid step\n",
                 times_a.back(), times_b.back());
    return 3;
  }

  std::vector<std::string> columns = wanted;
  if (columns.empty()) {
    for (const auto& name : a.header)
      if (name != "t" && find_column(b, name) >= 0) columns.push_back(name);
    if (columns.empty()) {
      std::fprintf(stderr, "no common columns to compare\n");
      return 3;
    }
  }

  Json per_column = Json::object();
  double max_diff = 0.0;
  for (const auto& name : columns) {
    int ca = find_column(a, name), cb = find_column(b, name);
    if (ca < 0 || cb < 0) {
      std::fprintf(stderr, "column '%s' missing from one file\n", name.c_str());
      return 3;
    }
    double sup = 0.0;
    for (size_t i = 0; i < a.rows; ++i) {
      size_t j = nearest_index(times_b, times_a[i]);
      sup = std::max(sup,
                     std::abs(a.columns[size_t(ca)][i] - b.columns[size_t(cb)][j]));
    }
    per_column[name] = sup;
    max_diff = std::max(max_diff, sup);
  }

  Json report;
  report["rows_a"] = a.rows;
  report["rows_b"] = b.rows;
  report["columns"] = per_column;
  report["max_abs_diff"] = max_diff;
  if (tolerance_set) {
    report["tolerance"] = tolerance;
    report["pass"] = max_diff <= tolerance;
  }
  if (!write_file(out_path, report.dump() + "\n")) {
    std::fprintf(stderr, "cannot write '%s'\n", out_path.c_str());
    return 3;
  }
  return 0;
}

int diagnostics_command(const RunArgs& args, const std::string& intervals_out) {
  std::string config_text;
  if (!read_config_text(args.config, config_text)) {
    std::fprintf(stderr, "cannot read config '%s'\n", args.config.c_str());
    return 2;
  }
  Json config;
  try {
    config = Json::parse(config_text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config is not valid JSON: %s\n", e.what());
    return 2;
  }
  if (args.seed_set) config["seed"] = args.seed;

  dynsq_run* raw = nullptr;
  dynsq_status status = dynsq_run_simulation(config.dump().c_str(), &raw);
  if (status != DYNSQ_OK) return report_failure(status);
  RunPtr run(raw);

  double max_gap = 0.0, sigma = 0.0;
  uint64_t resamples = 0, max_indegree = 0;
  dynsq_run_diagnostics(run.get(), &max_gap, &sigma, &resamples, &max_indegree);
  size_t interval_count = dynsq_run_interval_count(run.get());

  Json report;
  report["max_gap"] = max_gap;
  report["sigma"] = sigma;
  report["resample_count"] = resamples;
  report["max_indegree"] = max_indegree;
  report["interval_count"] = interval_count;
  if (!write_file(args.out, report.dump() + "\n")) {
    std::fprintf(stderr, "cannot write '%s'\n", args.out.c_str());
    return 3;
  }

  if (!intervals_out.empty()) {
    std::vector<uint64_t> arrivals(interval_count), departures(interval_count);
    dynsq_run_copy_intervals(run.get(), arrivals.data(), departures.data(),
                             interval_count);
    std::string csv = "interval,arrivals,departures\n";
    for (size_t i = 0; i < interval_count; ++i)
      csv += std::to_string(i + 1) + "," + std::to_string(arrivals[i]) + "," +
             std::to_string(departures[i]) + "\n";
    if (!write_file(intervals_out, csv)) {
      std::fprintf(stderr, "cannot write '%s'\n", intervals_out.c_str());
      return 3;
    }
  }
  return 0;
}

void add_run_options(CLI::App* sub, RunArgs& args, CLI::Option*& seed_opt,
                     bool with_replications) {
  sub->add_option("--config", args.config,
                  "config file path, '-' for stdin, or inline JSON")
      ->required();
  sub->add_option("--out", args.out, "trajectory CSV path (default stdout)");
  sub->add_option("--summary", args.summary,
                  "summary JSON path ('-' for stdout)");
  seed_opt = sub->add_option("--seed", args.seed, "override the config seed");
  if (with_replications) {
    sub->add_option("--replications", args.replications,
                    "independent replications with derived seeds");
    sub->add_option("--jobs", args.jobs, "worker threads for replications");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"queue simulator and fluid-limit toolkit"};
  app.set_version_flag("--version", dynsq_version());
  app.require_subcommand(1);

  RunArgs sim_args, fluid_args, baseline_args, pod_args, diag_args;
  CLI::Option *sim_seed, *fluid_seed, *baseline_seed, *pod_seed, *diag_seed;

  auto* sim = app.add_subcommand(
      "simulate", "run the queue simulation from a JSON config");
  add_run_options(sim, sim_args, sim_seed, true);

  auto* fluid =
      app.add_subcommand("fluid", "integrate the occupancy ODE from a config");
  add_run_options(fluid, fluid_args, fluid_seed, false);

  auto* baseline = app.add_subcommand(
      "baseline", "simulate servers that only ever serve their own arrivals");
  add_run_options(baseline, baseline_args, baseline_seed, true);

  auto* pod = app.add_subcommand(
      "power-of-d", "simulate dispatch to fresh uniform choices per arrival");
  add_run_options(pod, pod_args, pod_seed, true);

  double eq_lambda = 0.0;
  std::uint32_t eq_imax = 0;
  std::string eq_dist, eq_out;
  auto* eq = app.add_subcommand(
      "equilibrium", "equilibrium occupancy and mean response time");
  eq->add_option("--lambda", eq_lambda, "arrival rate per server, in (0,1)")
      ->required();
  eq->add_option("--dist", eq_dist, "degree distribution, e.g. '2:1/2,4:1/2'")
      ->required();
  eq->add_option("--imax", eq_imax, "highest occupancy level to report");
  eq->add_option("--out", eq_out, "report path (default stdout)");

  std::string cmp_a, cmp_b, cmp_out;
  std::vector<std::string> cmp_columns;
  double cmp_tolerance = 0.0;
  auto* cmp = app.add_subcommand(
      "compare", "sup-difference of two trajectory CSVs on aligned grids");
  cmp->add_option("--a", cmp_a, "first CSV")->required();
  cmp->add_option("--b", cmp_b, "second CSV")->required();
  cmp->add_option("--columns", cmp_columns,
                  "columns to compare (default: all shared)")
      ->delimiter(',');
  auto* tol_opt =
      cmp->add_option("--tolerance", cmp_tolerance, "pass/fail threshold");
  cmp->add_option("--out", cmp_out, "report path (default stdout)");

  std::string diag_intervals;
  auto* diag = app.add_subcommand(
      "diagnostics", "graph-resampling separation diagnostics of a run");
  diag->add_option("--config", diag_args.config,
                   "config file path, '-' for stdin, or inline JSON")
      ->required();
  diag->add_option("--out", diag_args.out, "report JSON path (default stdout)");
  diag_seed = diag->add_option("--seed", diag_args.seed,
                               "override the config seed");
  diag->add_option("--intervals-out", diag_intervals,
                   "per-interval event counts CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  sim_args.seed_set = sim_seed->count() > 0;
  fluid_args.seed_set = fluid_seed->count() > 0;
  baseline_args.seed_set = baseline_seed->count() > 0;
  pod_args.seed_set = pod_seed->count() > 0;
  diag_args.seed_set = diag_seed->count() > 0;

  if (app.got_subcommand(sim)) return run_command(dynsq_run_simulation, sim_args);
  if (app.got_subcommand(fluid)) return run_command(dynsq_run_fluid, fluid_args);
  if (app.got_subcommand(baseline))
    return run_command(dynsq_run_baseline, baseline_args);
  if (app.got_subcommand(pod)) return run_command(dynsq_run_power_of_d, pod_args);
  if (app.got_subcommand(eq))
    return equilibrium_command(eq_lambda, eq_dist, eq_imax, eq_out);
  if (app.got_subcommand(cmp))
    return compare_command(cmp_a, cmp_b, cmp_columns, cmp_tolerance,
                           tol_opt->count() > 0, cmp_out);
  if (app.got_subcommand(diag)) return diagnostics_command(diag_args, diag_intervals);
  return 2;
}
