#include "dynsq/graphs.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <unordered_set>

namespace dynsq {

namespace {
GraphLaw make_law(GraphLaw::Kind kind, std::uint32_t n, std::uint32_t degree = 0) {
  GraphLaw law;
  law.kind = kind;
  law.n = n;
  law.degree = degree;
  return law;
}
}  // namespace

GraphLaw GraphLaw::ring(std::uint32_t n) { return make_law(Kind::Ring, n); }
GraphLaw GraphLaw::disjoint_triangles(std::uint32_t n) {
  return make_law(Kind::DisjointTriangles, n);
}
GraphLaw GraphLaw::double_star(std::uint32_t n) {
  return make_law(Kind::DoubleStar, n);
}
GraphLaw GraphLaw::complete(std::uint32_t n) { return make_law(Kind::Complete, n); }
GraphLaw GraphLaw::d_regular(std::uint32_t n, std::uint32_t degree) {
  return make_law(Kind::DRegularDirected, n, degree);
}
GraphLaw GraphLaw::configuration(std::uint32_t n, DegreeDistribution dist) {
  GraphLaw law = make_law(Kind::ConfigurationByDegree, n);
  law.degree_dist = std::move(dist);
  return law;
}

void GraphLaw::validate() const {
  if (n == 0) raise(ErrorCode::InvalidLaw, "graph on zero servers");
  switch (kind) {
    case Kind::Ring:
      if (n < 3) raise(ErrorCode::InvalidLaw, "ring needs at least 3 servers");
      break;
    case Kind::DisjointTriangles:
      if (n % 3 != 0)
        raise(ErrorCode::InvalidLaw,
              "disjoint triangles need a server count divisible by 3");
      break;
    case Kind::DoubleStar:
      if (n < 2) raise(ErrorCode::InvalidLaw, "double star needs at least 2 servers");
      break;
    case Kind::Complete:
      break;
    case Kind::DRegularDirected:
      if (degree >= n)
        raise(ErrorCode::InvalidLaw, "regular outdegree must be below n");
      break;
    case Kind::ConfigurationByDegree:
      if (!degree_dist)
        raise(ErrorCode::InvalidLaw, "configuration law without a degree distribution");
      break;
  }
}

namespace {

// Base edges of the fixed topologies as undirected pairs on 0..n-1.
std::vector<std::pair<std::uint32_t, std::uint32_t>> base_pairs(const GraphLaw& law) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::uint32_t n = law.n;
  switch (law.kind) {
    case GraphLaw::Kind::Ring:
      for (std::uint32_t u = 0; u < n; ++u) pairs.emplace_back(u, (u + 1) % n);
      break;
    case GraphLaw::Kind::DisjointTriangles:
      for (std::uint32_t base = 0; base < n; base += 3) {
        pairs.emplace_back(base, base + 1);
        pairs.emplace_back(base + 1, base + 2);
        pairs.emplace_back(base, base + 2);
      }
      break;
    case GraphLaw::Kind::DoubleStar:
      pairs.emplace_back(0, 1);
      for (std::uint32_t u = 2; u < n; ++u) {
        pairs.emplace_back(0, u);
        pairs.emplace_back(1, u);
      }
      break;
    case GraphLaw::Kind::Complete:
      for (std::uint32_t u = 0; u < n; ++u)
        for (std::uint32_t v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
      break;
    default:
      break;
  }
  return pairs;
}

std::vector<std::uint32_t> random_permutation(std::uint32_t n, Rng& rng) {
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::uint32_t i = n; i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  return perm;
}

GraphSnapshot from_adjacency(std::uint32_t n,
                             std::vector<std::vector<std::uint32_t>>& adjacency) {
  std::vector<std::uint32_t> offsets(n + 1, 0);
  std::size_t total = 0;
  for (std::uint32_t u = 0; u < n; ++u) {
    std::sort(adjacency[u].begin(), adjacency[u].end());
    total += adjacency[u].size();
    offsets[u + 1] = std::uint32_t(total);
  }
  std::vector<std::uint32_t> targets;
  targets.reserve(total);
  for (std::uint32_t u = 0; u < n; ++u)
    targets.insert(targets.end(), adjacency[u].begin(), adjacency[u].end());
  return GraphSnapshot(n, std::move(offsets), std::move(targets));
}

std::uint32_t clamped_degree(const DegreeDistribution& dist, std::uint32_t n, Rng& rng) {
  double u = rng.uniform01();
  double acc = 0.0;
  for (const auto& [degree, mass] : dist.support()) {
    acc += mass;
    if (u < acc) return std::min(degree, n - 1);
  }
  return n - 1;  // infinity atom (or float residue at the very top)
}

// k distinct uniform picks from {0..n-1} minus `self`, sorted.
std::vector<std::uint32_t> distinct_neighbors(std::uint32_t n, std::uint32_t self,
                                              std::uint32_t k, Rng& rng) {
  std::vector<std::uint32_t> picks;
  picks.reserve(k);
  if (k >= (n - 1) / 2) {
    std::vector<std::uint32_t> pool;
    pool.reserve(n - 1);
    for (std::uint32_t v = 0; v < n; ++v)
      if (v != self) pool.push_back(v);
    for (std::uint32_t i = 0; i < k; ++i) {
      std::uint32_t j = std::uint32_t(rng.uniform_index(pool.size() - i)) + i;
      std::swap(pool[i], pool[j]);
      picks.push_back(pool[i]);
    }
  } else {
    std::unordered_set<std::uint32_t> seen;
    while (picks.size() < k) {
      auto v = std::uint32_t(rng.uniform_index(n));
      if (v == self || !seen.insert(v).second) continue;
      picks.push_back(v);
    }
  }
  std::sort(picks.begin(), picks.end());
  return picks;
}

}  // namespace

GraphSnapshot sample_graph(const GraphLaw& law, Rng& rng) {
  law.validate();
  std::uint32_t n = law.n;
  std::vector<std::vector<std::uint32_t>> adjacency(n);

  switch (law.kind) {
    case GraphLaw::Kind::Ring:
    case GraphLaw::Kind::DisjointTriangles:
    case GraphLaw::Kind::DoubleStar:
    case GraphLaw::Kind::Complete: {
      auto perm = random_permutation(n, rng);
      for (auto [a, b] : base_pairs(law)) {
        std::uint32_t u = perm[a], v = perm[b];
        adjacency[u].push_back(v);
        adjacency[v].push_back(u);
      }
      break;
    }
    case GraphLaw::Kind::DRegularDirected: {
      auto perm = random_permutation(n, rng);
      for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t shift = 1; shift <= law.degree; ++shift)
          adjacency[perm[a]].push_back(perm[(a + shift) % n]);
      break;
    }
    case GraphLaw::Kind::ConfigurationByDegree: {
      for (std::uint32_t u = 0; u < n; ++u) {
        std::uint32_t d = clamped_degree(*law.degree_dist, n, rng);
        adjacency[u] = distinct_neighbors(n, u, d, rng);
      }
      break;
    }
  }
  return from_adjacency(n, adjacency);
}

DegreeDistribution empirical_outdegree(const GraphSnapshot& graph) {
  std::map<std::uint32_t, std::uint64_t> counts;
  for (std::uint32_t u = 0; u < graph.node_count(); ++u)
    ++counts[graph.outdegree(u)];
  std::map<std::uint32_t, double> probs;
  for (const auto& [degree, count] : counts)
    probs[degree] = double(count) / double(graph.node_count());
  return DegreeDistribution::validated(probs);
}

DegreeDistribution empirical_outdegree(const GraphLaw& law) {
  law.validate();
  double n = double(law.n);
  switch (law.kind) {
    case GraphLaw::Kind::Ring:
    case GraphLaw::Kind::DisjointTriangles:
      return DegreeDistribution::point_mass(2);
    case GraphLaw::Kind::DoubleStar: {
      std::map<std::uint32_t, double> probs;
      probs[law.n - 1] += 2.0 / n;
      if (law.n > 2) probs[2] += (n - 2.0) / n;
      return DegreeDistribution::validated(probs);
    }
    case GraphLaw::Kind::Complete:
      return DegreeDistribution::point_mass(law.n - 1);
    case GraphLaw::Kind::DRegularDirected:
      return DegreeDistribution::point_mass(law.degree);
    case GraphLaw::Kind::ConfigurationByDegree: {
      std::map<std::uint32_t, double> probs;
      double clamped = law.degree_dist->mass_at_infinity();
      for (const auto& [degree, mass] : law.degree_dist->support()) {
        if (degree >= law.n - 1)
          clamped += mass;
        else
          probs[degree] += mass;
      }
      if (clamped > 0.0) probs[law.n - 1] += clamped;
      return DegreeDistribution::validated(probs);
    }
  }
  raise(ErrorCode::InvalidLaw, "unknown graph law");
}

std::uint32_t max_indegree(const GraphSnapshot& graph) {
  std::vector<std::uint32_t> indegree(graph.node_count(), 0);
  for (std::uint32_t u = 0; u < graph.node_count(); ++u)
    for (auto v : graph.out_neighbors(u)) ++indegree[v];
  std::uint32_t max = 0;
  for (auto d : indegree) max = std::max(max, d);
  return max;
}

}  // namespace dynsq
