#include <doctest.h>

#include <cmath>

#include "mecpart/error.hpp"
#include "mecpart/system_model.hpp"

using namespace mecpart;

TEST_CASE("mean channel gain matches independent high-precision values") {
  RadioParams radio;
  // A_d (c / (4 pi f_c d))^3 evaluated at 40 digits.
  CHECK(mean_channel_gain(radio, 100.0) == doctest::Approx(7.299829419667830156928e-11).epsilon(1e-13));
  CHECK(mean_channel_gain(radio, 10.0) == doctest::Approx(7.299829419667830156928e-8).epsilon(1e-13));
  CHECK(mean_channel_gain(radio, 50.0) == doctest::Approx(5.83986353573426412554243e-10).epsilon(1e-13));
  CHECK_THROWS_AS(mean_channel_gain(radio, 0.0), ParameterError);
}

TEST_CASE("rician gain without scatter is the line-of-sight power") {
  Rng rng(3);
  CHECK(sample_rician_gain(2.0, 1.0, rng) == doctest::Approx(2.0));
}

TEST_CASE("rician gain averages to the mean gain") {
  Rng rng(11);
  const double mean = 1e-9;
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += sample_rician_gain(mean, 0.3, rng);
  CHECK(sum / n == doctest::Approx(mean).epsilon(0.01));
}

TEST_CASE("topology respects region, center base station and minimum distance") {
  Rng rng(5);
  const auto topo = random_topology(6, 10, 200.0, 10.0, rng);
  CHECK(topo.base_station.x == 100.0);
  CHECK(topo.base_station.y == 100.0);
  for (std::size_t i = 0; i < topo.num_tds; ++i) {
    CHECK(topo.td_distances_m[i] >= 10.0);
    CHECK(topo.td_positions[i].x >= 0.0);
    CHECK(topo.td_positions[i].x <= 200.0);
  }
  for (double d : topo.ad_distances_m) CHECK(d >= 10.0);
  CHECK_NOTHROW(topo.validate());
}

TEST_CASE("uplink and downlink share the frame draw") {
  Rng rng(9);
  const auto topo = random_topology(3, 2, 200.0, 10.0, rng);
  const auto g = sample_channel_state(topo, RadioParams{}, rng);
  REQUIRE(g.td_uplink.size() == 3);
  CHECK(g.td_uplink == g.td_downlink);
  CHECK(g.ad_downlink.size() == 2);
}

TEST_CASE("resource draws stay inside their ranges") {
  Rng rng(2);
  ResourceRanges r;
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_resource_state(2, 3, r, rng);
    for (double f : d.es_hz) CHECK((f >= 1e9 && f <= 2e9));
    for (double f : d.ad_hz) CHECK((f >= 0.2e9 && f <= 1.6e9));
  }
}

TEST_CASE("state encoding round-trips") {
  Environment env(EnvironmentConfig{});
  const auto& s = env.state();
  const auto scaling = default_feature_scaling(env.radio());
  const auto f = encode_state(s, scaling);
  CHECK(f.size() == 3 * 2 + 2 * 3);
  const auto back = decode_state(f, 2, 3, scaling, s.td_hz);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.gains.td_uplink[i] == doctest::Approx(s.gains.td_uplink[i]).epsilon(1e-15));
    CHECK(back.es_hz[i] == doctest::Approx(s.es_hz[i]).epsilon(1e-15));
  }
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.ad_hz[i] == doctest::Approx(s.ad_hz[i]).epsilon(1e-15));
}

TEST_CASE("random tasks follow the task ranges") {
  Rng rng(4);
  const auto tasks = random_tasks(50, TaskRanges{}, rng);
  for (const auto& t : tasks) {
    CHECK(t.data_bits >= 300.0 * 8192.0);
    CHECK(t.data_bits <= 500.0 * 8192.0);
    CHECK(t.cycles >= 30e6);
    CHECK(t.cycles <= 80e6);
    CHECK(t.num_results() >= 3);
    CHECK(t.num_results() <= 4);
  }
}

TEST_CASE("task validation rejects weights that do not sum to one") {
  TaskSpec t;
  t.data_bits = 1.0;
  t.cycles = 1.0;
  t.result_weights = {0.5, 0.4};
  CHECK_THROWS(t.validate());
  t.result_weights = {0.5, 0.5};
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("environment is deterministic under a seed and keeps td frequencies static") {
  EnvironmentConfig cfg;
  cfg.seed = 42;
  Environment a(cfg), b(cfg);
  const double td0 = a.state().td_hz[0];
  for (int i = 0; i < 5; ++i) {
    const auto& sa = a.advance_frame();
    const auto& sb = b.advance_frame();
    CHECK(sa.gains.td_uplink == sb.gains.td_uplink);
    CHECK(sa.es_hz == sb.es_hz);
    CHECK(sa.td_hz[0] == td0);
  }
  CHECK(a.state().frame == 5);
}
