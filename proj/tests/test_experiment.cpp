#include <doctest.h>

#include <filesystem>
#include <limits>

#include "mecpart/error.hpp"
#include "mecpart/experiment.hpp"
#include "mecpart/metrics.hpp"

using namespace mecpart;

namespace {

ExperimentConfig small_config() {
  auto cfg = default_config();
  cfg.learner.hidden = {32, 16};
  cfg.learner.replay_capacity = 64;
  cfg.learner.batch_size = 16;
  cfg.run.frames = 60;
  cfg.run.exhaustive_every = 5;
  cfg.run.checkpoint_every = 0;
  cfg.run.record_timing = false;
  return cfg;
}

TaskSpec task_with(std::size_t results, double bits, double cycles) {
  TaskSpec t;
  t.data_bits = bits;
  t.cycles = cycles;
  t.result_weights.assign(results, 1.0 / static_cast<double>(results));
  return t;
}

}  // namespace

TEST_CASE("Jain index") {
  CHECK(jain_index(std::vector<double>{2.0, 2.0, 2.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jain_index(std::vector<double>{1.0, 3.0}) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(jain_index(std::vector<double>{4.2}) == 1.0);
  CHECK_THROWS_AS(jain_index(std::vector<double>{1.0, 0.0}), ParameterError);
  CHECK_THROWS_AS(jain_index(std::vector<double>{}), ParameterError);
  CHECK_FALSE(try_jain_index(std::vector<double>{1.0, std::numeric_limits<double>::infinity()}).has_value());
}

TEST_CASE("oracle equals the minimum over all 25 action pairs") {
  EnvironmentConfig ec;
  ec.num_tds = 2;
  ec.num_ads = 2;
  ec.tasks.min_results = 3;
  ec.tasks.max_results = 3;
  ec.seed = 77;
  Environment env(ec);
  for (int i = 0; i < 10; ++i) {
    const auto& s = env.advance_frame();
    const auto actions = enumerate_actions(env.tasks(), 2, true);
    REQUIRE(actions.size() == 25);
    std::optional<ExtendedDelay> best;
    PartitionAction arg;
    for (const auto& a : actions) {
      const auto v = bottleneck_threshold(build_delay_matrix(env.tasks(), a, s, env.radio()));
      if (!best || v < *best) {
        best = v;
        arg = a;
      }
    }
    const auto o = brute_force_oracle(s, env.tasks(), env.radio(), 10);
    CHECK(o.bottleneck == *best);
    CHECK(o.action == arg);
    CHECK(o.actions_feasible == 25);
  }
}

TEST_CASE("oracle with one single-result task is the whole-task value") {
  RadioParams radio;
  SystemState s;
  const double g = mean_channel_gain(radio, 40.0);
  s.gains = {{g}, {g}, {g}};
  s.es_hz = {1.2e9};
  s.ad_hz = {0.9e9};
  s.td_hz = {0.5e9};
  const std::vector<TaskSpec> tasks{task_with(1, 2e6, 4e7)};
  const auto o = brute_force_oracle(s, tasks, radio, 10);
  CHECK(o.action == nosp_action(tasks));
  CHECK(o.bottleneck == evaluate_action(tasks, nosp_action(tasks), s, radio).schedule.bottleneck);
}

TEST_CASE("oracle is never worse than any decision candidate and refuses large instances") {
  Environment env(EnvironmentConfig{});
  Rng rng(3);
  const auto scaling = default_feature_scaling(env.radio());
  const Mlp net = Mlp::random(network_shape(2, 3, env.tasks(), std::vector<std::size_t>{16}), rng);
  for (int i = 0; i < 10; ++i) {
    const auto& s = env.advance_frame();
    const auto o = brute_force_oracle(s, env.tasks(), env.radio(), 10);
    const auto d = otpps_frame(s, net, 8, env.tasks(), env.radio(), scaling);
    for (const auto& c : d.candidates) CHECK_FALSE(c.bottleneck < o.bottleneck);
  }
  CHECK_THROWS_AS(brute_force_oracle(env.state(), env.tasks(), env.radio(), 5), ParameterError);
}

TEST_CASE("a one-frame run yields one record and no training") {
  auto cfg = small_config();
  cfg.run.frames = 1;
  std::vector<FrameRecord> records;
  const auto s = run_training(cfg, {[&](const FrameRecord& r) { records.push_back(r); }, {}});
  CHECK(records.size() == 1);
  CHECK(s.training_steps == 0);
  CHECK_FALSE(records[0].loss.has_value());
  CHECK(records[0].t == 1);
}

TEST_CASE("record streams are reproducible under a fixed seed") {
  auto cfg = small_config();
  auto stream = [&] {
    std::string out;
    run_training(cfg, {[&](const FrameRecord& r) { out += to_json(r, false).dump() + "\n"; }, {}});
    return out;
  };
  const auto a = stream();
  const auto b = stream();
  CHECK(a == b);
  CHECK(a.find("decision_s") == std::string::npos);
  cfg.seed = 2;
  CHECK(stream() != a);
}

TEST_CASE("records satisfy the metric invariants") {
  auto cfg = small_config();
  std::size_t with_oracle = 0;
  run_training(cfg, {[&](const FrameRecord& r) {
                       REQUIRE(r.jain.has_value());
                       CHECK(*r.jain <= 1.0 + 1e-12);
                       CHECK(*r.jain >= 1.0 / 2.0 - 1e-12);
                       CHECK(r.mnd >= r.mean_eta);
                       if (r.exhaustive_mnd) {
                         ++with_oracle;
                         CHECK(*r.exhaustive_mnd <= r.mnd);
                       }
                     },
                     {}});
  CHECK(with_oracle == 12);
}

TEST_CASE("comparison runs every algorithm on shared frames") {
  auto cfg = small_config();
  cfg.run.frames = 20;
  cfg.run.warmup_frames = 5;
  const auto cmp = compare_algorithms(cfg);
  REQUIRE(cmp.frames.size() == 20);
  CHECK(cmp.frames.front().t == 6);
  for (const auto& f : cmp.frames) {
    const auto& o = f.algorithms;
    CHECK(o.at("EXHAUSTIVE").mnd <= o.at("OTPPS").mnd);
    CHECK(o.at("EXHAUSTIVE").mnd <= o.at("NOSP").mnd);
    CHECK(o.at("OTPPS").mnd <= o.at("KM").mnd);
    CHECK(o.at("OTPPS").mnd <= o.at("GREEDY").mnd);
    CHECK(o.at("OTPPS").mnd <= o.at("RANDOM").mnd);
    CHECK(o.at("NOSP").mnd <= o.at("LOCAL").mnd);
  }
  CHECK(cmp.summary_of("OTPPS").frames == 20);
  CHECK_THROWS_AS(cmp.summary_of("NOPE"), ParameterError);

  cfg.run.exhaustive_cap = 4;
  CHECK_THROWS_AS(compare_algorithms(cfg), ParameterError);
}

TEST_CASE("moving average and convergence index") {
  const std::vector<std::uint64_t> t{10, 20, 30, 40};
  const std::vector<double> v{4, 2, 2, 2};
  const auto ma = moving_average(t, v, 20);
  CHECK(ma == std::vector<double>{4, 3, 2, 2});
  CHECK(convergence_index(ma, 0.05) == 2);
  CHECK(convergence_index(std::vector<double>{1, 1, 1}, 0.05) == 0);
}

TEST_CASE("config JSON round-trip and validation") {
  auto cfg = default_config();
  cfg.seed = 9;
  cfg.environment.num_tds = 4;
  cfg.learner.quantizer = QuantizerKind::KMeans;
  cfg.run.algorithms = {"OTPPS", "NOSP"};
  const auto back = config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.environment.num_tds == 4);

  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"sed", 1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"run", {{"frames", 0}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"tasks", {{"cycles", {5, 1}}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"run", {{"algorithms", {"FOO"}}}}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
}

TEST_CASE("checkpoint round-trip") {
  auto cfg = small_config();
  cfg.run.frames = 40;
  cfg.run.exhaustive_every = 0;
  Environment env(cfg.environment);
  OtppsAgent agent(env.tasks(), 3, env.radio(), cfg.scaling(), cfg.learner, 1);
  run_training(cfg, {}, &agent);
  const auto path = std::filesystem::temp_directory_path() / "mecpart_checkpoint_test.json";
  save_checkpoint(path, agent, 40, cfg.seed);
  const auto c = load_checkpoint(path);
  CHECK(c.t == 40);
  CHECK(c.net.layer_sizes() == agent.network().layer_sizes());
  CHECK(std::equal(c.net.params().begin(), c.net.params().end(), agent.network().params().begin()));
  CHECK(c.adam.step == agent.adam().step);
  CHECK(c.adam.v == agent.adam().v);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);

  const auto evals = run_evaluation(cfg, c.net);
  CHECK(evals.size() == 40);
}

TEST_CASE("decision timing is positive") {
  auto cfg = small_config();
  const auto t = measure_decision_time(cfg, 5, 1);
  CHECK(t.mean_s > 0.0);
  CHECK(t.p50_s <= t.max_s);
}
