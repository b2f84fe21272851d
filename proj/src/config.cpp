#include "dynsq/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "json.hpp"

namespace dynsq {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad_config(const std::string& what) {
  raise(ErrorCode::ConfigInvalid, what);
}

std::string normalized(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != '_' && c != '-' && c != ' ')
      out.push_back(char(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

double parse_mass(const std::string& token) {
  auto to_double = [&](const std::string& part) {
    double value = 0.0;
    auto res = std::from_chars(part.data(), part.data() + part.size(), value);
    if (res.ec != std::errc() || res.ptr != part.data() + part.size())
      bad_config("malformed mass '" + token + "'");
    return value;
  };
  auto slash = token.find('/');
  if (slash == std::string::npos) return to_double(token);
  double num = to_double(token.substr(0, slash));
  double den = to_double(token.substr(slash + 1));
  if (den == 0.0) bad_config("zero denominator in mass '" + token + "'");
  return num / den;
}

struct GraphKindName {
  GraphLaw::Kind kind;
  const char* canonical;
  std::array<const char*, 3> aliases;
};

constexpr std::array<GraphKindName, 6> kGraphKinds{{
    {GraphLaw::Kind::Ring, "Ring", {"ring", nullptr, nullptr}},
    {GraphLaw::Kind::DisjointTriangles,
     "DisjointTriangles",
     {"disjointtriangles", "triangles", nullptr}},
    {GraphLaw::Kind::DoubleStar, "DoubleStar", {"doublestar", nullptr, nullptr}},
    {GraphLaw::Kind::Complete, "Complete", {"complete", nullptr, nullptr}},
    {GraphLaw::Kind::DRegularDirected,
     "DeterministicDRegularDirected",
     {"deterministicdregulardirected", "dregular", nullptr}},
    {GraphLaw::Kind::ConfigurationByDegree,
     "ConfigurationByDegree",
     {"configurationbydegree", "configbydegree", "configuration"}},
}};

GraphLaw::Kind parse_graph_kind(const std::string& text) {
  std::string norm = normalized(text);
  for (const auto& entry : kGraphKinds) {
    if (norm == normalized(entry.canonical)) return entry.kind;
    for (const char* alias : entry.aliases)
      if (alias && norm == alias) return entry.kind;
  }
  bad_config("unknown graph kind '" + text + "'");
}

const char* graph_kind_name(GraphLaw::Kind kind) {
  for (const auto& entry : kGraphKinds)
    if (entry.kind == kind) return entry.canonical;
  return "Ring";
}

Json preset_body(const std::string& name) {
  double n_ring = 1500, n_large = 5000;
  static const std::map<std::string, Json> presets = {
      {"appendix_a_ring",
       {{"n", 1500},
        {"load", 0.9},
        {"graph", "Ring"},
        {"schedule", "poisson"},
        {"mu", std::log(std::log(n_ring))},
        {"horizon", 100.0},
        {"record_interval", 0.1}}},
      {"appendix_a_triangles",
       {{"n", 1500},
        {"load", 0.9},
        {"graph", "DisjointTriangles"},
        {"schedule", "poisson"},
        {"mu", std::log(std::log(n_ring))},
        {"horizon", 100.0},
        {"record_interval", 0.1}}},
      {"appendix_a_ring_static",
       {{"n", 1500},
        {"load", 0.9},
        {"graph", "Ring"},
        {"schedule", "static"},
        {"horizon", 200.0},
        {"record_interval", 0.1}}},
      {"appendix_a_triangles_static",
       {{"n", 1500},
        {"load", 0.9},
        {"graph", "DisjointTriangles"},
        {"schedule", "static"},
        {"horizon", 200.0},
        {"record_interval", 0.1}}},
      {"appendix_a_doublestar_static",
       {{"n", 1500},
        {"load", 0.9},
        {"graph", "DoubleStar"},
        {"schedule", "static"},
        {"horizon", 200.0},
        {"record_interval", 0.1},
        {"track_central", true}}},
      {"appendix_a_doublestar_dynamic",
       {{"n", 1500},
        {"load", 0.9},
        {"graph", "DoubleStar"},
        {"schedule", "poisson"},
        {"mu", std::log(n_ring)},
        {"horizon", 100.0},
        {"record_interval", 0.1},
        {"avg_window_start", 40.0},
        {"avg_window_end", 100.0},
        {"track_central", true}}},
      {"appendix_a_doublestar_dynamic_large",
       {{"n", 5000},
        {"load", 0.9},
        {"graph", "DoubleStar"},
        {"schedule", "poisson"},
        {"mu", std::log(n_large)},
        {"horizon", 100.0},
        {"record_interval", 0.1},
        {"avg_window_start", 40.0},
        {"avg_window_end", 100.0},
        {"track_central", true}}},
  };
  auto it = presets.find(name);
  if (it == presets.end()) bad_config("unknown preset '" + name + "'");
  return it->second;
}

const std::map<RunConfig::Mode, std::vector<std::string>>& allowed_keys() {
  static const std::map<RunConfig::Mode, std::vector<std::string>> keys = {
      {RunConfig::Mode::Simulate,
       {"mode", "preset", "seed", "n", "lambda_n", "load", "graph", "degree",
        "dist", "schedule", "mu", "kappa", "horizon", "record_interval",
        "avg_window_start", "avg_window_end", "tie_break", "track_servers",
        "track_central", "initial_queues"}},
      {RunConfig::Mode::Fluid,
       {"mode", "seed", "lambda", "dist", "horizon", "step", "record_interval",
        "initial_occupancy"}},
      {RunConfig::Mode::Baseline,
       {"mode", "seed", "n", "lambda_n", "load", "horizon", "record_interval",
        "avg_window_start", "avg_window_end"}},
      {RunConfig::Mode::PowerOfD,
       {"mode", "seed", "n", "lambda_n", "load", "dist", "horizon",
        "record_interval", "avg_window_start", "avg_window_end"}},
  };
  return keys;
}

double require_number(const Json& j, const std::string& key) {
  if (!j.contains(key)) bad_config("missing key '" + key + "'");
  if (!j[key].is_number()) bad_config("key '" + key + "' must be a number");
  return j[key].get<double>();
}

bool nonnegative_integer(const Json& value) {
  return value.is_number_unsigned() ||
         (value.is_number_integer() && value.get<std::int64_t>() >= 0);
}

std::uint64_t require_uint(const Json& j, const std::string& key) {
  if (!j.contains(key)) bad_config("missing key '" + key + "'");
  if (!nonnegative_integer(j[key]))
    bad_config("key '" + key + "' must be a nonnegative integer");
  return j[key].get<std::uint64_t>();
}

std::string require_string(const Json& j, const std::string& key) {
  if (!j.contains(key)) bad_config("missing key '" + key + "'");
  if (!j[key].is_string()) bad_config("key '" + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace

DegreeDistribution parse_degree_distribution(const std::string& text) {
  std::map<std::uint32_t, double> probs;
  double mass_at_infinity = 0.0;
  std::size_t pos = 0;
  if (text.empty()) bad_config("empty degree distribution");
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    std::string entry = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    auto colon = entry.find(':');
    if (colon == std::string::npos)
      bad_config("distribution entry '" + entry + "' needs the form d:mass");
    std::string key = entry.substr(0, colon);
    double mass = parse_mass(entry.substr(colon + 1));
    if (normalized(key) == "inf") {
      mass_at_infinity += mass;
    } else {
      std::uint32_t degree = 0;
      auto res = std::from_chars(key.data(), key.data() + key.size(), degree);
      if (res.ec != std::errc() || res.ptr != key.data() + key.size())
        bad_config("malformed degree '" + key + "'");
      probs[degree] += mass;
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return DegreeDistribution::validated(probs, mass_at_infinity);
}

std::string format_degree_distribution(const DegreeDistribution& dist) {
  std::string out;
  auto append_number = [&out](double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
  };
  for (const auto& [degree, mass] : dist.support()) {
    if (!out.empty()) out.push_back(',');
    out += std::to_string(degree);
    out.push_back(':');
    append_number(mass);
  }
  if (dist.mass_at_infinity() > 0.0) {
    if (!out.empty()) out.push_back(',');
    out += "inf:";
    append_number(dist.mass_at_infinity());
  }
  return out;
}

const char* mode_name(RunConfig::Mode mode) {
  switch (mode) {
    case RunConfig::Mode::Simulate: return "simulate";
    case RunConfig::Mode::Fluid: return "fluid";
    case RunConfig::Mode::Baseline: return "baseline";
    case RunConfig::Mode::PowerOfD: return "power_of_d";
  }
  return "simulate";
}

std::vector<std::string> preset_names() {
  return {"appendix_a_ring",
          "appendix_a_triangles",
          "appendix_a_ring_static",
          "appendix_a_triangles_static",
          "appendix_a_doublestar_static",
          "appendix_a_doublestar_dynamic",
          "appendix_a_doublestar_dynamic_large"};
}

RunConfig parse_run_config(const std::string& json_text, RunConfig::Mode mode) {
  Json file;
  try {
    file = Json::parse(json_text);
  } catch (const std::exception& e) {
    bad_config(std::string("config is not valid JSON: ") + e.what());
  }
  if (!file.is_object()) bad_config("config must be a JSON object");

  Json merged = Json::object();
  if (file.contains("preset")) {
    if (mode != RunConfig::Mode::Simulate)
      bad_config("presets only apply to simulation configs");
    merged = preset_body(require_string(file, "preset"));
    if (file.contains("lambda_n") || file.contains("load")) {
      merged.erase("lambda_n");
      merged.erase("load");
    }
    if (file.contains("schedule")) {
      merged.erase("mu");
      merged.erase("kappa");
    }
  }
  for (const auto& [key, value] : file.items())
    if (key != "preset") merged[key] = value;

  const auto& allowed = allowed_keys().at(mode);
  for (const auto& [key, value] : merged.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      bad_config("unknown key '" + key + "' for mode " + mode_name(mode));

  if (merged.contains("mode") &&
      normalized(require_string(merged, "mode")) != normalized(mode_name(mode)))
    bad_config("config mode '" + require_string(merged, "mode") +
               "' does not match the requested mode");

  RunConfig config;
  config.mode = mode;
  if (merged.contains("seed")) config.seed = require_uint(merged, "seed");
  config.horizon = require_number(merged, "horizon");
  if (merged.contains("record_interval"))
    config.record_interval = require_number(merged, "record_interval");
  bool has_start = merged.contains("avg_window_start");
  bool has_end = merged.contains("avg_window_end");
  if (has_start != has_end)
    bad_config("avg_window_start and avg_window_end come as a pair");
  if (has_start)
    config.average_window = {require_number(merged, "avg_window_start"),
                             require_number(merged, "avg_window_end")};

  auto read_lambda_n = [&]() {
    std::uint64_t n64 = require_uint(merged, "n");
    if (n64 == 0 || n64 > 0xFFFFFFFFull) bad_config("server count out of range");
    config.n = std::uint32_t(n64);
    if (merged.contains("lambda_n") == merged.contains("load"))
      bad_config("give exactly one of lambda_n and load");
    config.lambda_n = merged.contains("lambda_n")
                          ? require_number(merged, "lambda_n")
                          : require_number(merged, "load") * double(config.n);
  };
  auto read_dist = [&]() {
    config.dist_text = require_string(merged, "dist");
    config.dist = parse_degree_distribution(config.dist_text);
  };

  switch (mode) {
    case RunConfig::Mode::Simulate: {
      read_lambda_n();
      GraphLaw law;
      law.kind = parse_graph_kind(require_string(merged, "graph"));
      law.n = config.n;
      if (law.kind == GraphLaw::Kind::DRegularDirected)
        law.degree = std::uint32_t(require_uint(merged, "degree"));
      else if (merged.contains("degree"))
        bad_config("key 'degree' only applies to the d-regular law");
      if (law.kind == GraphLaw::Kind::ConfigurationByDegree) {
        read_dist();
        law.degree_dist = config.dist;
      } else if (merged.contains("dist")) {
        bad_config("key 'dist' only applies to the configuration law");
      }
      config.graph_law = law;

      std::string sched = normalized(require_string(merged, "schedule"));
      if (sched == "static") {
        if (merged.contains("mu") || merged.contains("kappa"))
          bad_config("static schedules take neither mu nor kappa");
      } else if (sched == "everykarrivals") {
        config.schedule = ResamplingSchedule::every_k_arrivals(
            merged.contains("kappa") ? require_uint(merged, "kappa") : 0);
        if (merged.contains("mu"))
          bad_config("arrival-count schedules take no rate");
      } else {
        double mu = require_number(merged, "mu");
        if (sched == "poisson")
          config.schedule = ResamplingSchedule::poisson(mu);
        else if (sched == "boundedgapdeterministic")
          config.schedule = ResamplingSchedule::bounded_gap_deterministic(mu);
        else if (sched == "boundedgapuniform")
          config.schedule = ResamplingSchedule::bounded_gap_uniform(mu);
        else
          bad_config("unknown schedule '" + require_string(merged, "schedule") + "'");
        if (merged.contains("kappa"))
          bad_config("timed schedules take no kappa");
      }

      if (merged.contains("tie_break")) {
        std::string tie = normalized(require_string(merged, "tie_break"));
        if (tie == "smallestindex")
          config.tie_break = TieBreak::SmallestIndex;
        else if (tie == "uniform")
          config.tie_break = TieBreak::UniformRandom;
        else
          bad_config("unknown tie_break '" + require_string(merged, "tie_break") + "'");
      }
      if (merged.contains("track_central"))
        config.track_central = merged["track_central"].get<bool>();
      if (merged.contains("track_servers")) {
        for (const auto& v : merged["track_servers"]) {
          if (!nonnegative_integer(v)) bad_config("track_servers must hold server ids");
          config.track_servers.push_back(v.get<std::uint32_t>());
        }
      }
      if (merged.contains("initial_queues")) {
        for (const auto& v : merged["initial_queues"]) {
          if (!nonnegative_integer(v)) bad_config("initial_queues must hold task counts");
          config.initial_queues.push_back(v.get<std::uint32_t>());
        }
      }
      break;
    }
    case RunConfig::Mode::Fluid: {
      config.lambda = require_number(merged, "lambda");
      read_dist();
      if (merged.contains("step")) config.step = require_number(merged, "step");
      if (merged.contains("initial_occupancy")) {
        for (const auto& v : merged["initial_occupancy"]) {
          if (!v.is_number()) bad_config("initial_occupancy must hold numbers");
          config.initial_occupancy.push_back(v.get<double>());
        }
      }
      break;
    }
    case RunConfig::Mode::Baseline:
      read_lambda_n();
      break;
    case RunConfig::Mode::PowerOfD:
      read_lambda_n();
      read_dist();
      break;
  }
  return config;
}

SimConfig RunConfig::to_sim_config() const {
  SimConfig sim;
  sim.n = n;
  sim.lambda_n = lambda_n;
  sim.graph_law = graph_law;
  sim.schedule = schedule;
  sim.horizon = horizon;
  sim.initial_queues = initial_queues;
  sim.record_interval = record_interval;
  sim.track_servers = track_servers;
  sim.track_central = track_central;
  sim.tie_break = tie_break;
  sim.average_window = average_window;
  sim.seed = seed;
  return sim;
}

std::string config_echo_json(const RunConfig& config) {
  Json echo;
  echo["mode"] = mode_name(config.mode);
  echo["seed"] = config.seed;
  auto emit_window = [&] {
    if (config.average_window) {
      echo["avg_window_start"] = config.average_window->first;
      echo["avg_window_end"] = config.average_window->second;
    }
  };
  switch (config.mode) {
    case RunConfig::Mode::Simulate: {
      echo["n"] = config.n;
      echo["lambda_n"] = config.lambda_n;
      echo["graph"] = graph_kind_name(config.graph_law.kind);
      if (config.graph_law.kind == GraphLaw::Kind::DRegularDirected)
        echo["degree"] = config.graph_law.degree;
      if (config.graph_law.kind == GraphLaw::Kind::ConfigurationByDegree)
        echo["dist"] = format_degree_distribution(*config.graph_law.degree_dist);
      if (!config.schedule) {
        echo["schedule"] = "static";
      } else {
        switch (config.schedule->kind) {
          case ResamplingSchedule::Kind::EveryKArrivals:
            echo["schedule"] = "every_k_arrivals";
            echo["kappa"] = config.schedule->kappa;
            break;
          case ResamplingSchedule::Kind::BoundedGapDeterministic:
            echo["schedule"] = "bounded_gap_deterministic";
            echo["mu"] = config.schedule->rate;
            break;
          case ResamplingSchedule::Kind::BoundedGapUniform:
            echo["schedule"] = "bounded_gap_uniform";
            echo["mu"] = config.schedule->rate;
            break;
          case ResamplingSchedule::Kind::PoissonRenewal:
            echo["schedule"] = "poisson";
            echo["mu"] = config.schedule->rate;
            break;
        }
      }
      echo["horizon"] = config.horizon;
      echo["record_interval"] = config.record_interval;
      emit_window();
      echo["tie_break"] = config.tie_break == TieBreak::SmallestIndex
                              ? "smallest_index"
                              : "uniform";
      if (!config.track_servers.empty()) echo["track_servers"] = config.track_servers;
      if (config.track_central) echo["track_central"] = true;
      if (!config.initial_queues.empty()) echo["initial_queues"] = config.initial_queues;
      break;
    }
    case RunConfig::Mode::Fluid:
      echo["lambda"] = config.lambda;
      echo["dist"] = format_degree_distribution(*config.dist);
      echo["horizon"] = config.horizon;
      echo["step"] = config.step;
      echo["record_interval"] = config.record_interval;
      if (!config.initial_occupancy.empty())
        echo["initial_occupancy"] = config.initial_occupancy;
      break;
    case RunConfig::Mode::Baseline:
      echo["n"] = config.n;
      echo["lambda_n"] = config.lambda_n;
      echo["horizon"] = config.horizon;
      echo["record_interval"] = config.record_interval;
      emit_window();
      break;
    case RunConfig::Mode::PowerOfD:
      echo["n"] = config.n;
      echo["lambda_n"] = config.lambda_n;
      echo["dist"] = format_degree_distribution(*config.dist);
      echo["horizon"] = config.horizon;
      echo["record_interval"] = config.record_interval;
      emit_window();
      break;
  }
  return echo.dump();
}

}  // namespace dynsq
