#include <doctest.h>

#include <set>

#include "mecpart/quantizer.hpp"

using namespace mecpart;

namespace {

RelaxedAction worked_example() { return RelaxedAction{{{0.2, 0.4, 0.7, 0.9}, {0.3, 0.7, 0.9}}}; }

}  // namespace

TEST_CASE("STQ reproduces the four quantized actions of the worked example") {
  const auto out = stq_quantize(worked_example(), 4);
  REQUIRE(out.size() == 4);
  CHECK(out[0].flat() == std::vector<int>{1, 2, 3, 4, 1, 2, 2});
  CHECK(out[1].flat() == std::vector<int>{1, 2, 3, 4, 1, 2, 3});
  CHECK(out[2].flat() == std::vector<int>{1, 2, 3, 4, 1, 2, 3});
  CHECK(out[3].flat() == std::vector<int>{1, 1, 2, 2, 1, 2, 2});
}

TEST_CASE("filtering the worked example leaves three candidates") {
  const auto raw = stq_quantize(worked_example(), 4);
  const std::vector<std::size_t> counts{4, 3};
  const auto c = filter_candidates(raw, counts, 3);
  REQUIRE(c.size() == 3);
  CHECK(c[0].source == 0);
  CHECK(c[1].source == 1);
  CHECK(c[2].source == 3);
}

TEST_CASE("normalization of the worked example is exact") {
  const PartitionAction a{{{1, 2, 3, 4}, {1, 2, 2}}};
  const auto n = normalize_action(a);
  CHECK(n.values[0] == std::vector<double>{0.25, 0.5, 0.75, 1.0});
  CHECK(n.values[1] == std::vector<double>{1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0});
  CHECK(normalize_action(PartitionAction{{{1}}}).values[0][0] == 1.0);
}

TEST_CASE("STQ degenerate inputs") {
  const RelaxedAction equal{{{0.4, 0.4, 0.4, 0.4}}};
  for (const auto& a : stq_quantize(equal, 5)) CHECK(a.labels[0] == std::vector<int>{1, 1, 1, 1});
  const RelaxedAction single{{{0.7}}};
  for (const auto& a : stq_quantize(single, 3)) CHECK(a.labels[0] == std::vector<int>{1});
}

TEST_CASE("STQ output is always a canonical action") {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + trial % 6);
    for (auto& x : v) x = u(rng);
    for (std::size_t q = 0; q < 4; ++q) CHECK(validate_labels(stq_labels(v, q, 4), v.size()).ok());
  }
}

TEST_CASE("STQ produces several distinct candidates for generic inputs") {
  Rng rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int diverse = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    RelaxedAction r{{std::vector<double>(4), std::vector<double>(3)}};
    for (auto& row : r.values)
      for (auto& x : row) x = u(rng);
    const std::vector<std::size_t> counts{4, 3};
    if (filter_candidates(stq_quantize(r, 8), counts, 3).size() >= 2) ++diverse;
  }
  CHECK(diverse > trials / 4);
}

TEST_CASE("quantize after normalize keeps the grouping when not every result is alone") {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (const auto& labels : set_partitions(n)) {
      const PartitionAction a{{labels}};
      const auto q = stq_quantize(normalize_action(a), 1)[0];
      const bool all_alone = static_cast<std::size_t>(a.num_partitions(0)) == n;
      if (n == 1 || !all_alone) {
        CHECK(q == a);
      } else {
        // Labels N_res-1 and N_res share the residue bin.
        CHECK(q.num_partitions(0) == n - 1);
      }
      // Idempotent on grouping.
      CHECK(stq_quantize(normalize_action(q), 1)[0] == q);
    }
  }
}

TEST_CASE("k-means labels") {
  CHECK(kmeans_labels(std::vector<double>{0.1, 0.9}, 2) == std::vector<int>{1, 2});
  CHECK(kmeans_labels(std::vector<double>{0.1, 0.15, 0.8}, 2) == std::vector<int>{1, 1, 2});
  CHECK(kmeans_labels(std::vector<double>{0.3, 0.2, 0.9}, 1) == std::vector<int>{1, 1, 1});
  // Out-of-order input keeps result order in the labels.
  CHECK(kmeans_labels(std::vector<double>{0.8, 0.1, 0.85, 0.12}, 2) == std::vector<int>{1, 2, 1, 2});
  CHECK(kmeans_labels(std::vector<double>{0.5, 0.1}, 5) == std::vector<int>{1, 2});
}

TEST_CASE("k-means quantizer covers k = 1..max N_res") {
  const auto out = kmeans_quantize(worked_example());
  REQUIRE(out.size() == 4);
  CHECK(out[0].flat() == std::vector<int>{1, 1, 1, 1, 1, 1, 1});
  CHECK(out[3].labels[0] == std::vector<int>{1, 2, 3, 4});
  // Task 2 has three results; k = 4 is clamped.
  CHECK(out[3].labels[1].size() == 3);
  CHECK(out[3].labels[1] == out[2].labels[1]);
}

TEST_CASE("filtering removes duplicates and infeasible actions") {
  const std::vector<std::size_t> counts{3};
  const std::vector<PartitionAction> raw{
      PartitionAction{{{2, 2, 1}}}, PartitionAction{{{1, 1, 2}}}, PartitionAction{{{1, 2, 3}}},
      PartitionAction{{{1, 1, 1}}}};
  // N = 1, M = 0: three partitions exceed 2N + M.
  const auto c = filter_candidates(raw, counts, 0);
  REQUIRE(c.size() == 2);
  CHECK(c[0].action == PartitionAction{{{1, 1, 2}}});
  CHECK(c[0].source == 0);
  CHECK(c[1].source == 3);
}
