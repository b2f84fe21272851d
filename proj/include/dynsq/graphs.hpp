#pragma once

#include <cstdint>
#include <optional>

#include "dynsq/core.hpp"
#include "dynsq/rng.hpp"

namespace dynsq {

/// A distribution over graphs on n labeled servers. Fixed topologies are
/// relabeled by a fresh uniform permutation on every sample, making the law
/// invariant under relabeling; undirected topologies carry both edge
/// directions.
struct GraphLaw {
  enum class Kind {
    Ring,                  // cycle, n >= 3
    DisjointTriangles,     // n/3 disjoint 3-cycles, n divisible by 3
    DoubleStar,            // two adjacent hubs, every leaf tied to both, n >= 2
    Complete,              // all pairs
    DRegularDirected,      // u -> u+1, ..., u+d (mod n), relabeled; d < n
    ConfigurationByDegree, // i.i.d. outdegrees, uniform distinct neighbors
  };

  Kind kind = Kind::Ring;
  std::uint32_t n = 0;
  std::uint32_t degree = 0;                         // DRegularDirected
  std::optional<DegreeDistribution> degree_dist;    // ConfigurationByDegree

  static GraphLaw ring(std::uint32_t n);
  static GraphLaw disjoint_triangles(std::uint32_t n);
  static GraphLaw double_star(std::uint32_t n);
  static GraphLaw complete(std::uint32_t n);
  static GraphLaw d_regular(std::uint32_t n, std::uint32_t degree);
  static GraphLaw configuration(std::uint32_t n, DegreeDistribution dist);

  /// Throws InvalidLaw when the parameters are inconsistent.
  void validate() const;
};

/// Draws one graph from the law. Pure function of (law, rng state).
GraphSnapshot sample_graph(const GraphLaw& law, Rng& rng);

/// Empirical outdegree pmf of a concrete snapshot (counts / n).
DegreeDistribution empirical_outdegree(const GraphSnapshot& graph);

/// Exact outdegree pmf of the law itself. For ConfigurationByDegree this is
/// the sampling distribution with degrees clamped to n-1 (the infinity atom
/// maps to n-1 as well).
DegreeDistribution empirical_outdegree(const GraphLaw& law);

std::uint32_t max_indegree(const GraphSnapshot& graph);

}  // namespace dynsq
