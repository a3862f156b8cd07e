#include <doctest.h>

#include <sstream>

#include "mecpart/delay.hpp"
#include "mecpart/error.hpp"

using namespace mecpart;

namespace {

// One TD at 100 m, one AD at 50 m.
SystemState hand_state() {
  RadioParams radio;
  SystemState s;
  const double g = mean_channel_gain(radio, 100.0);
  s.gains.td_uplink = {g};
  s.gains.td_downlink = {g};
  s.gains.ad_downlink = {mean_channel_gain(radio, 50.0)};
  s.es_hz = {1.5e9};
  s.ad_hz = {1.0e9};
  s.td_hz = {0.5e9};
  return s;
}

TaskSpec hand_task() {
  TaskSpec t;
  t.data_bits = 400.0 * 8192.0;
  t.cycles = 60e6;
  t.result_weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  return t;
}

}  // namespace

TEST_CASE("extended delay ordering") {
  const auto a = ExtendedDelay::from_ratio(0.5);
  const auto b = ExtendedDelay::from_ratio(0.9);
  const auto v = ExtendedDelay::from_ratio(1.2);
  const auto f = ExtendedDelay::forbidden();
  CHECK(a < b);
  CHECK(b < v);
  CHECK(v < f);
  CHECK(ExtendedDelay::from_ratio(1.0).tier == DelayTier::Finite);
  CHECK(v.tier == DelayTier::DeadlineViolated);
  CHECK(f == ExtendedDelay::forbidden());
  CHECK(to_string(v) == "1.2!");
  CHECK(to_string(f) == "inf");
}

TEST_CASE("placement index round-trips") {
  for (std::size_t l = 0; l <= 4; ++l) CHECK(Placement::from_index(l, 3).index(3) == l);
  CHECK(Placement::from_index(4, 3).kind == Placement::Kind::Local);
  CHECK_THROWS(Placement::from_index(5, 3));
}

TEST_CASE("rates and upload match high-precision values") {
  const auto s = hand_state();
  RadioParams radio;
  CHECK(uplink_rate(0, s, radio) == doctest::Approx(508238.91283028659247).epsilon(1e-13));
  CHECK(td_downlink_rate(0, s, radio) == doctest::Approx(5334663.1181068566032).epsilon(1e-13));
  CHECK(ad_downlink_rate(0, s, radio) == doctest::Approx(16434254.449198999039).epsilon(1e-13));
  CHECK(upload_delay(hand_task(), 0, s, radio) == doctest::Approx(6.447361501212332).epsilon(1e-13));
}

TEST_CASE("delay matrix cells match high-precision values") {
  const auto s = hand_state();
  const std::vector<TaskSpec> tasks{hand_task()};
  const PartitionAction a{{{1, 1, 2}}};
  const auto m = build_delay_matrix(tasks, a, s, RadioParams{});
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 3);
  // Columns: own TD, AD 0, own ES slice.
  CHECK(m.seconds(0, 0) == doctest::Approx(6.9613342940986425082).epsilon(1e-13));
  CHECK(m.seconds(0, 1) == doctest::Approx(6.6289333939982437899).epsilon(1e-13));
  CHECK(m.seconds(0, 2) == doctest::Approx(6.4753615012123317877).epsilon(1e-13));
  CHECK(m.seconds(1, 0) == doctest::Approx(6.7410602400045093423).epsilon(1e-13));
  CHECK(m.seconds(1, 1) == doctest::Approx(6.5511168685185672175).epsilon(1e-13));
  CHECK(m.seconds(1, 2) == doctest::Approx(6.4633615012123317877).epsilon(1e-13));
  // Deadline 1 s: every cell is violated.
  CHECK(m.at(0, 2).tier == DelayTier::DeadlineViolated);
}

TEST_CASE("cross-device cells are forbidden") {
  auto s = hand_state();
  s.gains.td_uplink.push_back(s.gains.td_uplink[0]);
  s.gains.td_downlink.push_back(s.gains.td_downlink[0]);
  s.es_hz.push_back(1.2e9);
  s.td_hz.push_back(0.4e9);
  const std::vector<TaskSpec> tasks{hand_task(), hand_task()};
  const auto m = build_delay_matrix(tasks, PartitionAction{{{1, 1, 1}, {1, 2, 2}}}, s, RadioParams{});
  REQUIRE(m.cols() == 5);
  REQUIRE(m.rows() == 3);
  // Row 0 is TD 0: TD 1 local column and ES slice 1 are forbidden.
  CHECK(m.at(0, m.td_column(1)).is_forbidden());
  CHECK(m.at(0, m.es_column(1)).is_forbidden());
  CHECK_FALSE(m.at(0, m.es_column(0)).is_forbidden());
  CHECK(m.at(1, m.td_column(0)).is_forbidden());
  CHECK(m.at(2, m.es_column(0)).is_forbidden());
  CHECK_FALSE(m.at(2, m.ad_column(0)).is_forbidden());
  CHECK(m.column_placement(m.ad_column(0), 1).kind == Placement::Kind::Auxiliary);
  CHECK(m.column_placement(m.es_column(1), 1).kind == Placement::Kind::EdgeServer);
  CHECK_THROWS(m.column_placement(m.es_column(0), 1));
}

TEST_CASE("zero uplink gain gives an infinite upload") {
  auto s = hand_state();
  s.gains.td_uplink = {0.0};
  CHECK(std::isinf(upload_delay(hand_task(), 0, s, RadioParams{})));
}

TEST_CASE("task completion is the slowest partition") {
  const std::vector<double> grid{0.2, 0.5, 0.9, 0.3};
  auto m = DelayMatrix::from_ratios(2, 2, grid);
  const std::vector<std::size_t> cols{1, 0};
  const auto c = task_completion(m, cols);
  // from_ratios puts each row in its own task.
  REQUIRE(c.seconds.size() == 2);
  CHECK(c.seconds[0] == 0.5);
  CHECK(c.seconds[1] == 0.9);
}

TEST_CASE("grid text round-trip") {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> grid{0.25, inf, 1.5, 0.75};
  const auto m = DelayMatrix::from_ratios(2, 2, grid);
  std::stringstream ss;
  m.write_grid(ss);
  const auto back = DelayMatrix::read_grid(ss);
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(back.at(r, c) == m.at(r, c));
  CHECK(back.at(1, 0).tier == DelayTier::DeadlineViolated);
  std::stringstream bad("1 2\n3\n");
  CHECK_THROWS(DelayMatrix::read_grid(bad));
}
