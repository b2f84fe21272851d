#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "dynsq/core.hpp"
#include "dynsq/error.hpp"
#include "dynsq/rng.hpp"
#include "helpers.hpp"

using namespace dynsq;

TEST_SUITE("core") {

TEST_CASE("degree distribution validation") {
  auto d = DegreeDistribution::validated({{0, 0.5}, {2, 0.5}});
  CHECK(d.mass_at(0) == 0.5);
  CHECK(d.mass_at(2) == 0.5);
  CHECK(d.mass_at(1) == 0.0);
  CHECK(d.mass_at_infinity() == 0.0);

  CHECK_ERROR_CODE(DegreeDistribution::validated({{0, 0.5}, {2, 0.6}}),
                   ErrorCode::NotAProbability);
  CHECK_ERROR_CODE(DegreeDistribution::validated({{1, -0.1}, {2, 1.1}}),
                   ErrorCode::NegativeMass);
  CHECK_ERROR_CODE(DegreeDistribution::validated({{3, 0.9}}, 0.2),
                   ErrorCode::NotAProbability);
  CHECK_ERROR_CODE(DegreeDistribution::validated({}, -0.5),
                   ErrorCode::NegativeMass);

  auto inf_only = DegreeDistribution::validated({}, 1.0);
  CHECK(inf_only.mass_at_infinity() == 1.0);
  CHECK_FALSE(inf_only.has_finite_support_mass());
  CHECK_ERROR_CODE(inf_only.min_support(), ErrorCode::NoFiniteSupport);
  CHECK_ERROR_CODE(inf_only.max_support(), ErrorCode::NoFiniteSupport);

  auto trimmed = DegreeDistribution::validated({{2, 1.0}, {5, 0.0}});
  CHECK(trimmed.support().size() == 1);
  CHECK(trimmed.max_support() == 2);
}

TEST_CASE("support statistics") {
  auto d = DegreeDistribution::validated({{2, 0.3}, {7, 0.7}});
  CHECK(d.min_support() == 2);
  CHECK(d.max_support() == 7);
  CHECK(d.finite_mean() == doctest::Approx(0.3 * 2 + 0.7 * 7));
  auto half = DegreeDistribution::validated({{1, 0.5}, {3, 0.5}});
  CHECK(half.finite_mean() == doctest::Approx(2.0));
}

TEST_CASE("generating function values") {
  auto cube = DegreeDistribution::point_mass(3);
  CHECK(cube.pgf(0.9) == doctest::Approx(0.729).epsilon(1e-12));
  CHECK(cube.pgf(1.0) == 1.0);
  CHECK(cube.pgf(0.0) == 0.0);
  CHECK(cube.pgf_derivative(1.0) == doctest::Approx(3.0));

  auto mix = DegreeDistribution::validated({{0, 0.5}, {2, 0.5}});
  CHECK(mix.pgf(0.9) == doctest::Approx(0.905).epsilon(1e-12));
  CHECK(mix.pgf(0.0) == 0.5);

  auto heavy = DegreeDistribution::validated({}, 1.0);
  CHECK(heavy.pgf(0.9) == 0.0);
  CHECK(heavy.pgf(1.0) == 0.0);

  auto odd = DegreeDistribution::validated({{1, 0.5}, {3, 0.5}});
  CHECK(odd.pgf_derivative(1.0) == doctest::Approx(2.0));
  CHECK(DegreeDistribution::point_mass(0).pgf_derivative(0.7) == 0.0);

  CHECK_ERROR_CODE(cube.pgf(-0.1), ErrorCode::DomainError);
  CHECK_ERROR_CODE(cube.pgf(1.1), ErrorCode::DomainError);
  CHECK_ERROR_CODE(cube.pgf_derivative(2.0), ErrorCode::DomainError);
}

TEST_CASE("occupancy from queue lengths") {
  QueueVector empty{{0, 0, 0}};
  auto q0 = occupancy_from_queues(empty);
  CHECK(q0.max_level() == 0);
  CHECK(q0.value(0) == 1.0);
  CHECK(q0.value(3) == 0.0);

  QueueVector mixed{{2, 0, 1}};
  auto q1 = occupancy_from_queues(mixed);
  CHECK(q1.value(0) == 1.0);
  CHECK(q1.value(1) == doctest::Approx(2.0 / 3));
  CHECK(q1.value(2) == doctest::Approx(1.0 / 3));
  CHECK(q1.value(3) == 0.0);

  QueueVector level{{5, 5, 5, 5}};
  auto q2 = occupancy_from_queues(level);
  CHECK(q2.max_level() == 5);
  for (std::size_t i = 0; i <= 5; ++i) CHECK(q2.value(i) == 1.0);
  CHECK(q2.value(6) == 0.0);
}

TEST_CASE("occupancy is monotone and conserves tasks on random inputs") {
  Rng rng(2024);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t n = 1 + rng.uniform_index(40);
    QueueVector queues;
    for (std::size_t v = 0; v < n; ++v)
      queues.lengths.push_back(std::uint32_t(rng.uniform_index(12)));
    auto q = occupancy_from_queues(queues);
    CHECK(q.value(0) == 1.0);
    for (std::size_t i = 1; i <= q.max_level() + 1; ++i) {
      CHECK(q.value(i) <= q.value(i - 1));
      CHECK(q.value(i) >= 0.0);
    }
    CHECK(double(n) * q.tail_sum() ==
          doctest::Approx(double(queues.total_tasks())).epsilon(1e-12));
  }
}

TEST_CASE("occupancy state validation") {
  CHECK_ERROR_CODE(OccupancyState::validated({0.9, 0.5}),
                   ErrorCode::DomainError);
  CHECK_ERROR_CODE(OccupancyState::validated({1.0, 0.5, 0.6}),
                   ErrorCode::DomainError);
  CHECK_ERROR_CODE(OccupancyState::validated({1.0, -0.1}),
                   ErrorCode::DomainError);

  auto repaired = OccupancyState::validated({1.0, 0.5, 0.5 + 1e-10}, 1e-9);
  CHECK(repaired.value(2) <= repaired.value(1));

  auto q = OccupancyState::validated({1.0, 0.5, 0.25});
  CHECK(q.tail_sum() == doctest::Approx(0.75));
  auto r = OccupancyState::validated({1.0, 0.75});
  CHECK(q.l1_distance(r) == doctest::Approx(0.25 + 0.25));
  CHECK(q.l1_distance(q) == 0.0);
}

TEST_CASE("graph snapshot invariants are enforced") {
  // 2-cycle: 0 -> 1, 1 -> 0.
  GraphSnapshot ok(2, {0, 1, 2}, {1, 0});
  CHECK(ok.node_count() == 2);
  CHECK(ok.edge_count() == 2);
  CHECK(ok.outdegree(0) == 1);
  CHECK(ok.out_neighbors(1)[0] == 0);

  CHECK_ERROR_CODE(GraphSnapshot(2, {0, 1, 2}, {0, 0}),
                   ErrorCode::InvalidLaw);  // self-loop
  CHECK_ERROR_CODE(GraphSnapshot(2, {0, 2, 2}, {1, 1}),
                   ErrorCode::InvalidLaw);  // duplicate edge
  CHECK_ERROR_CODE(GraphSnapshot(2, {0, 1, 2}, {1, 5}),
                   ErrorCode::InvalidLaw);  // target out of range
  CHECK_ERROR_CODE(GraphSnapshot(3, {0, 2, 2, 2}, {2, 1}),
                   ErrorCode::InvalidLaw);  // unsorted adjacency row
}

}  // TEST_SUITE
