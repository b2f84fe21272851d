#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dynsq/error.hpp"

namespace dynsq {

/// Outdegree distribution: a finite-support pmf over {0, 1, 2, ...} plus an
/// explicit atom at infinity for degree sequences that diverge with the
/// system size. Masses are stored exactly as given, never renormalized.
class DegreeDistribution {
 public:
  /// Validates and builds. Throws NegativeMass if any mass is negative,
  /// NotAProbability if the total differs from 1 by more than 1e-12.
  /// Zero-mass entries are dropped.
  static DegreeDistribution validated(const std::map<std::uint32_t, double>& probs,
                                      double mass_at_infinity = 0.0);

  /// Point mass at a single finite degree.
  static DegreeDistribution point_mass(std::uint32_t degree);

  std::span<const std::pair<std::uint32_t, double>> support() const {
    return entries_;
  }
  double mass_at_infinity() const { return mass_at_infinity_; }
  double mass_at(std::uint32_t degree) const;
  bool has_finite_support_mass() const { return !entries_.empty(); }

  /// Smallest degree with positive mass. Throws NoFiniteSupport if all mass
  /// sits at infinity.
  std::uint32_t min_support() const;

  /// Largest degree with positive mass (finite part only).
  std::uint32_t max_support() const;

  /// Mean of the finite part, sum of d * p(d).
  double finite_mean() const;

  /// Probability generating function sum_d x^d p(d) on [0, 1].
  /// Throws DomainError outside [0, 1].
  double pgf(double x) const;

  /// Derivative of the pgf, sum_d d x^(d-1) p(d) on [0, 1].
  double pgf_derivative(double x) const;

  bool operator==(const DegreeDistribution&) const = default;

 private:
  std::vector<std::pair<std::uint32_t, double>> entries_;  // sorted by degree
  double mass_at_infinity_ = 0.0;
};

/// Per-server queue lengths.
struct QueueVector {
  std::vector<std::uint32_t> lengths;

  std::uint64_t total_tasks() const;
  std::uint32_t max_length() const;
};

/// Occupancy vector q: q(i) is the fraction of servers holding at least i
/// tasks. q(0) == 1 exactly, entries lie in [0, 1] and are nonincreasing.
/// Stored truncated; levels beyond max_level() read as zero.
class OccupancyState {
 public:
  /// The empty system, q = (1).
  OccupancyState() : values_{1.0} {}

  /// Validates values (q(0) == 1, range, monotone within `tol`), repairs
  /// violations up to `tol` by clamping, throws DomainError beyond it.
  static OccupancyState validated(std::vector<double> values, double tol = 0.0);

  double value(std::size_t level) const {
    return level < values_.size() ? values_[level] : 0.0;
  }
  std::size_t max_level() const { return values_.size() - 1; }
  std::span<const double> values() const { return values_; }

  /// sum_{i >= 1} q(i), the mean queue length per server.
  double tail_sum() const;

  double l1_distance(const OccupancyState& other) const;

  bool operator==(const OccupancyState&) const = default;

 private:
  std::vector<double> values_;
};

/// Occupancy of a finite system: q(i) = (1/n) #{u : X(u) >= i}.
/// Throws DomainError on an empty queue vector.
OccupancyState occupancy_from_queues(const QueueVector& queues);

/// Directed graph snapshot in CSR form. Out-neighbor lists are sorted and
/// contain no self-loops or duplicates.
class GraphSnapshot {
 public:
  /// Validates the CSR arrays (monotone offsets, sorted unique in-range
  /// targets, no self-loops). Throws InvalidLaw on violations.
  GraphSnapshot(std::uint32_t node_count, std::vector<std::uint32_t> offsets,
                std::vector<std::uint32_t> targets);

  std::uint32_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return targets_.size(); }
  std::uint32_t outdegree(std::uint32_t u) const {
    return offsets_[u + 1] - offsets_[u];
  }
  std::span<const std::uint32_t> out_neighbors(std::uint32_t u) const {
    return {targets_.data() + offsets_[u],
            targets_.data() + offsets_[u + 1]};
  }

 private:
  std::uint32_t node_count_;
  std::vector<std::uint32_t> offsets_;  // size node_count + 1
  std::vector<std::uint32_t> targets_;
};

}  // namespace dynsq
