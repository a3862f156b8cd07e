#include "mecpart/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "mecpart/error.hpp"

namespace mecpart {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& section, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError("'" + section + "' must be an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + section + "." + key + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + section + "." + key + "': " + e.what());
  }
}

void read_range(const json& obj, const char* key, Range& out, const std::string& section) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError("'" + section + "." + key + "' must be [lo, hi]");
  out = {v[0].get<double>(), v[1].get<double>()};
}

json range_json(Range r) { return json::array({r.lo, r.hi}); }

}  // namespace

FeatureScaling ExperimentConfig::scaling() const {
  FeatureScaling s = default_feature_scaling(environment.radio);
  if (reference_gain > 0.0) s.reference_gain = reference_gain;
  s.reference_hz = reference_hz;
  return s;
}

void ExperimentConfig::validate() const {
  const auto& e = environment;
  auto check = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  check(e.num_tds >= 1, "topology.num_tds must be >= 1");
  check(e.region_side_m > 0.0, "topology.region_side_m must be positive");
  check(e.min_distance_m > 0.0 && e.min_distance_m < e.region_side_m / 2.0,
        "topology.min_distance_m must be in (0, side/2)");
  for (auto [name, r] : {std::pair{"tasks.data_bits", e.tasks.data_bits}, std::pair{"tasks.cycles", e.tasks.cycles},
                         std::pair{"resources.es_hz", e.resources.es_hz}, std::pair{"resources.ad_hz", e.resources.ad_hz},
                         std::pair{"resources.td_hz", e.resources.td_hz}}) {
    check(r.lo <= r.hi, std::string(name) + ": lo exceeds hi");
    check(r.lo > 0.0, std::string(name) + ": values must be positive");
  }
  check(e.tasks.min_results >= 1 && e.tasks.min_results <= e.tasks.max_results && e.tasks.max_results <= 64,
        "tasks.num_results must satisfy 1 <= lo <= hi <= 64");
  check(e.tasks.shared_cycles_frac >= 0.0 && e.tasks.shared_cycles_frac < 1.0, "tasks.shared_cycles_frac must be in [0,1)");
  check(e.tasks.shared_data_frac >= 0.0 && e.tasks.shared_data_frac < 1.0, "tasks.shared_data_frac must be in [0,1)");
  check(e.tasks.deadline_s > 0.0, "tasks.deadline_s must be positive");
  try {
    e.radio.validate();
  } catch (const ParameterError& err) {
    throw ConfigError(std::string("radio: ") + err.what());
  }
  check(learner.num_quantized >= 1, "learner.num_quantized must be >= 1");
  check(learner.batch_size >= 1, "learner.batch_size must be >= 1");
  check(learner.replay_capacity >= 1, "learner.replay_capacity must be >= 1");
  check(learner.adam.learning_rate > 0.0, "learner.learning_rate must be positive");
  for (std::size_t h : learner.hidden) check(h >= 1, "learner.hidden sizes must be positive");
  check(run.frames >= 1, "run.frames must be >= 1");
  check(reference_hz > 0.0, "features.reference_hz must be positive");
  static const std::set<std::string> known{"OTPPS", "NOSP", "MINGRA", "KMEANS", "EXHAUSTIVE",
                                           "GREEDY", "RANDOM", "KM", "LOCAL"};
  for (const auto& a : run.algorithms) check(known.contains(a), "unknown algorithm '" + a + "'");
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  reject_unknown(j, "config", {"seed", "topology", "tasks", "radio", "resources", "learner", "features", "run"});
  read(j, "seed", cfg.seed, "config");

  auto& env = cfg.environment;
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    reject_unknown(t, "topology", {"num_tds", "num_ads", "region_side_m", "min_distance_m"});
    read(t, "num_tds", env.num_tds, "topology");
    read(t, "num_ads", env.num_ads, "topology");
    read(t, "region_side_m", env.region_side_m, "topology");
    read(t, "min_distance_m", env.min_distance_m, "topology");
  }
  if (j.contains("tasks")) {
    const auto& t = j.at("tasks");
    reject_unknown(t, "tasks", {"data_bits", "cycles", "num_results", "shared_cycles_frac", "shared_data_frac", "deadline_s"});
    read_range(t, "data_bits", env.tasks.data_bits, "tasks");
    read_range(t, "cycles", env.tasks.cycles, "tasks");
    if (t.contains("num_results")) {
      const auto& r = t.at("num_results");
      if (!r.is_array() || r.size() != 2 || !r[0].is_number_unsigned() || !r[1].is_number_unsigned())
        throw ConfigError("'tasks.num_results' must be [lo, hi] with nonnegative integers");
      env.tasks.min_results = r[0].get<std::size_t>();
      env.tasks.max_results = r[1].get<std::size_t>();
    }
    read(t, "shared_cycles_frac", env.tasks.shared_cycles_frac, "tasks");
    read(t, "shared_data_frac", env.tasks.shared_data_frac, "tasks");
    read(t, "deadline_s", env.tasks.deadline_s, "tasks");
  }
  if (j.contains("radio")) {
    const auto& r = j.at("radio");
    reject_unknown(r, "radio", {"bandwidth_hz", "noise_w", "td_tx_power_w", "bs_tx_power_w", "path_loss_exponent",
                                "antenna_gain", "carrier_hz", "los_fraction"});
    read(r, "bandwidth_hz", env.radio.bandwidth_hz, "radio");
    read(r, "noise_w", env.radio.noise_w, "radio");
    read(r, "td_tx_power_w", env.radio.td_tx_power_w, "radio");
    read(r, "bs_tx_power_w", env.radio.bs_tx_power_w, "radio");
    read(r, "path_loss_exponent", env.radio.path_loss_exponent, "radio");
    read(r, "antenna_gain", env.radio.antenna_gain, "radio");
    read(r, "carrier_hz", env.radio.carrier_hz, "radio");
    read(r, "los_fraction", env.radio.los_fraction, "radio");
  }
  if (j.contains("resources")) {
    const auto& r = j.at("resources");
    reject_unknown(r, "resources", {"es_hz", "ad_hz", "td_hz"});
    read_range(r, "es_hz", env.resources.es_hz, "resources");
    read_range(r, "ad_hz", env.resources.ad_hz, "resources");
    read_range(r, "td_hz", env.resources.td_hz, "resources");
  }
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    reject_unknown(l, "learner", {"hidden", "learning_rate", "beta1", "beta2", "eps", "batch_size", "train_interval",
                                  "replay_capacity", "num_quantized", "quantizer"});
    read(l, "hidden", cfg.learner.hidden, "learner");
    read(l, "learning_rate", cfg.learner.adam.learning_rate, "learner");
    read(l, "beta1", cfg.learner.adam.beta1, "learner");
    read(l, "beta2", cfg.learner.adam.beta2, "learner");
    read(l, "eps", cfg.learner.adam.eps, "learner");
    read(l, "batch_size", cfg.learner.batch_size, "learner");
    read(l, "train_interval", cfg.learner.train_interval, "learner");
    read(l, "replay_capacity", cfg.learner.replay_capacity, "learner");
    read(l, "num_quantized", cfg.learner.num_quantized, "learner");
    if (l.contains("quantizer")) {
      const auto q = l.at("quantizer").get<std::string>();
      if (q == "stq") cfg.learner.quantizer = QuantizerKind::Stq;
      else if (q == "kmeans") cfg.learner.quantizer = QuantizerKind::KMeans;
      else throw ConfigError("learner.quantizer must be 'stq' or 'kmeans'");
    }
  }
  if (j.contains("features")) {
    const auto& f = j.at("features");
    reject_unknown(f, "features", {"reference_gain", "reference_hz"});
    read(f, "reference_gain", cfg.reference_gain, "features");
    read(f, "reference_hz", cfg.reference_hz, "features");
  }
  if (j.contains("run")) {
    const auto& r = j.at("run");
    reject_unknown(r, "run", {"frames", "warmup_frames", "exhaustive_every", "exhaustive_cap", "checkpoint_every",
                              "record_timing", "algorithms", "output_dir"});
    read(r, "frames", cfg.run.frames, "run");
    read(r, "warmup_frames", cfg.run.warmup_frames, "run");
    read(r, "exhaustive_every", cfg.run.exhaustive_every, "run");
    read(r, "exhaustive_cap", cfg.run.exhaustive_cap, "run");
    read(r, "checkpoint_every", cfg.run.checkpoint_every, "run");
    read(r, "record_timing", cfg.run.record_timing, "run");
    read(r, "algorithms", cfg.run.algorithms, "run");
    read(r, "output_dir", cfg.run.output_dir, "run");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json to_json(const ExperimentConfig& cfg) {
  const auto& env = cfg.environment;
  return json{
      {"seed", cfg.seed},
      {"topology",
       {{"num_tds", env.num_tds}, {"num_ads", env.num_ads}, {"region_side_m", env.region_side_m},
        {"min_distance_m", env.min_distance_m}}},
      {"tasks",
       {{"data_bits", range_json(env.tasks.data_bits)},
        {"cycles", range_json(env.tasks.cycles)},
        {"num_results", json::array({env.tasks.min_results, env.tasks.max_results})},
        {"shared_cycles_frac", env.tasks.shared_cycles_frac},
        {"shared_data_frac", env.tasks.shared_data_frac},
        {"deadline_s", env.tasks.deadline_s}}},
      {"radio",
       {{"bandwidth_hz", env.radio.bandwidth_hz}, {"noise_w", env.radio.noise_w},
        {"td_tx_power_w", env.radio.td_tx_power_w}, {"bs_tx_power_w", env.radio.bs_tx_power_w},
        {"path_loss_exponent", env.radio.path_loss_exponent}, {"antenna_gain", env.radio.antenna_gain},
        {"carrier_hz", env.radio.carrier_hz}, {"los_fraction", env.radio.los_fraction}}},
      {"resources",
       {{"es_hz", range_json(env.resources.es_hz)}, {"ad_hz", range_json(env.resources.ad_hz)},
        {"td_hz", range_json(env.resources.td_hz)}}},
      {"learner",
       {{"hidden", cfg.learner.hidden}, {"learning_rate", cfg.learner.adam.learning_rate},
        {"beta1", cfg.learner.adam.beta1}, {"beta2", cfg.learner.adam.beta2}, {"eps", cfg.learner.adam.eps},
        {"batch_size", cfg.learner.batch_size}, {"train_interval", cfg.learner.train_interval},
        {"replay_capacity", cfg.learner.replay_capacity}, {"num_quantized", cfg.learner.num_quantized},
        {"quantizer", cfg.learner.quantizer == QuantizerKind::Stq ? "stq" : "kmeans"}}},
      {"features", {{"reference_gain", cfg.reference_gain}, {"reference_hz", cfg.reference_hz}}},
      {"run",
       {{"frames", cfg.run.frames}, {"warmup_frames", cfg.run.warmup_frames},
        {"exhaustive_every", cfg.run.exhaustive_every}, {"exhaustive_cap", cfg.run.exhaustive_cap},
        {"checkpoint_every", cfg.run.checkpoint_every}, {"record_timing", cfg.run.record_timing},
        {"algorithms", cfg.run.algorithms}, {"output_dir", cfg.run.output_dir}}},
  };
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 over (master, stream)
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace mecpart
