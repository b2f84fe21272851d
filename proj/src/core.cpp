#include "dynsq/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dynsq {

namespace {

constexpr double kMassTolerance = 1e-12;

double ipow(double x, std::uint32_t e) {
  double result = 1.0;
  while (e != 0) {
    if (e & 1u) result *= x;
    x *= x;
    e >>= 1;
  }
  return result;
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotAProbability: return "NotAProbability";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::InvalidLaw: return "InvalidLaw";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::LoadOutOfRange: return "LoadOutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::CapTooSmall: return "CapTooSmall";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::MismatchedGrids: return "MismatchedGrids";
    case ErrorCode::NoFiniteSupport: return "NoFiniteSupport";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

DegreeDistribution DegreeDistribution::validated(
    const std::map<std::uint32_t, double>& probs, double mass_at_infinity) {
  double total = mass_at_infinity;
  if (mass_at_infinity < 0.0)
    raise(ErrorCode::NegativeMass, "mass at infinity is negative");
  DegreeDistribution dist;
  for (const auto& [degree, mass] : probs) {
    if (mass < 0.0)
      raise(ErrorCode::NegativeMass,
            "negative mass at degree " + std::to_string(degree));
    if (mass == 0.0) continue;
    dist.entries_.emplace_back(degree, mass);
    total += mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    raise(ErrorCode::NotAProbability,
          "masses sum to " + std::to_string(total) + ", expected 1");
  dist.mass_at_infinity_ = mass_at_infinity;
  return dist;
}

DegreeDistribution DegreeDistribution::point_mass(std::uint32_t degree) {
  return validated({{degree, 1.0}});
}

double DegreeDistribution::mass_at(std::uint32_t degree) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), degree,
                             [](const auto& e, std::uint32_t d) { return e.first < d; });
  return (it != entries_.end() && it->first == degree) ? it->second : 0.0;
}

std::uint32_t DegreeDistribution::min_support() const {
  if (entries_.empty())
    raise(ErrorCode::NoFiniteSupport, "all mass sits at infinity");
  return entries_.front().first;
}

std::uint32_t DegreeDistribution::max_support() const {
  if (entries_.empty())
    raise(ErrorCode::NoFiniteSupport, "all mass sits at infinity");
  return entries_.back().first;
}

double DegreeDistribution::finite_mean() const {
  double mean = 0.0;
  for (const auto& [degree, mass] : entries_) mean += double(degree) * mass;
  return mean;
}

double DegreeDistribution::pgf(double x) const {
  if (!(x >= 0.0 && x <= 1.0))
    raise(ErrorCode::DomainError, "pgf argument outside [0, 1]");
  double value = 0.0;
  for (const auto& [degree, mass] : entries_) value += mass * ipow(x, degree);
  return value;
}

double DegreeDistribution::pgf_derivative(double x) const {
  if (!(x >= 0.0 && x <= 1.0))
    raise(ErrorCode::DomainError, "pgf argument outside [0, 1]");
  double value = 0.0;
  for (const auto& [degree, mass] : entries_) {
    if (degree == 0) continue;
    value += mass * double(degree) * ipow(x, degree - 1);
  }
  return value;
}

std::uint64_t QueueVector::total_tasks() const {
  std::uint64_t total = 0;
  for (auto len : lengths) total += len;
  return total;
}

std::uint32_t QueueVector::max_length() const {
  std::uint32_t max = 0;
  for (auto len : lengths) max = std::max(max, len);
  return max;
}

OccupancyState OccupancyState::validated(std::vector<double> values, double tol) {
  if (values.empty() || values[0] != 1.0)
    raise(ErrorCode::DomainError, "occupancy must start with q(0) = 1");
  double prev = 1.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    double v = values[i];
    if (v < -tol || v > 1.0 + tol || v > prev + tol)
      raise(ErrorCode::DomainError,
            "occupancy violates range or monotonicity at level " + std::to_string(i));
    v = std::clamp(v, 0.0, prev);
    values[i] = v;
    prev = v;
  }
  OccupancyState state;
  state.values_ = std::move(values);
  return state;
}

double OccupancyState::tail_sum() const {
  double total = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) total += values_[i];
  return total;
}

double OccupancyState::l1_distance(const OccupancyState& other) const {
  double total = 0.0;
  std::size_t levels = std::max(values_.size(), other.values_.size());
  for (std::size_t i = 0; i < levels; ++i)
    total += std::abs(value(i) - other.value(i));
  return total;
}

OccupancyState occupancy_from_queues(const QueueVector& queues) {
  if (queues.lengths.empty())
    raise(ErrorCode::DomainError, "occupancy of an empty queue vector");
  std::uint32_t max_len = queues.max_length();
  std::vector<std::uint64_t> at_least(max_len + 2, 0);
  for (auto len : queues.lengths) ++at_least[len + 1];  // shifted exact counts
  for (std::size_t i = max_len + 1; i >= 1; --i) at_least[i - 1] += at_least[i];
  std::vector<double> values(max_len + 1);
  double n = double(queues.lengths.size());
  for (std::size_t i = 0; i <= max_len; ++i) values[i] = double(at_least[i + 1]) / n;
  values[0] = 1.0;
  return OccupancyState::validated(std::move(values));
}

GraphSnapshot::GraphSnapshot(std::uint32_t node_count,
                             std::vector<std::uint32_t> offsets,
                             std::vector<std::uint32_t> targets)
    : node_count_(node_count), offsets_(std::move(offsets)), targets_(std::move(targets)) {
  if (offsets_.size() != std::size_t(node_count_) + 1 || offsets_.front() != 0 ||
      offsets_.back() != targets_.size())
    raise(ErrorCode::InvalidLaw, "malformed adjacency offsets");
  for (std::uint32_t u = 0; u < node_count_; ++u) {
    if (offsets_[u + 1] < offsets_[u])
      raise(ErrorCode::InvalidLaw, "adjacency offsets not monotone");
    for (std::uint32_t k = offsets_[u]; k < offsets_[u + 1]; ++k) {
      std::uint32_t v = targets_[k];
      if (v >= node_count_) raise(ErrorCode::InvalidLaw, "edge target out of range");
      if (v == u) raise(ErrorCode::InvalidLaw, "self-loop");
      if (k > offsets_[u] && targets_[k - 1] >= v)
        raise(ErrorCode::InvalidLaw, "out-neighbors not sorted unique");
    }
  }
}

}  // namespace dynsq
