#include "mecpart/system_model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mecpart/error.hpp"

namespace mecpart {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool inside(Position p, double side) {
  return p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side;
}

double uniform(Range r, Rng& rng) {
  if (r.lo > r.hi) throw ParameterError("range lower bound exceeds upper bound");
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

void Topology::validate() const {
  require(num_tds >= 1, "topology needs at least one task device");
  require(td_positions.size() == num_tds && td_distances_m.size() == num_tds,
          "task device arrays do not match num_tds");
  require(ad_positions.size() == num_ads && ad_distances_m.size() == num_ads,
          "auxiliary device arrays do not match num_ads");
  for (std::size_t i = 0; i < num_tds; ++i) {
    require(td_distances_m[i] > 0.0, "task device distance must be positive");
    require(inside(td_positions[i], region_side_m), "task device outside region");
  }
  for (std::size_t i = 0; i < num_ads; ++i) {
    require(ad_distances_m[i] > 0.0, "auxiliary device distance must be positive");
    require(inside(ad_positions[i], region_side_m), "auxiliary device outside region");
  }
}

Topology random_topology(std::size_t num_tds, std::size_t num_ads, double region_side_m,
                         double min_distance_m, Rng& rng) {
  require(num_tds >= 1, "topology needs at least one task device");
  require(region_side_m > 0.0, "region side must be positive");
  require(min_distance_m > 0.0, "minimum distance must be positive");
  require(min_distance_m < region_side_m / 2.0, "minimum distance leaves no room in the region");

  Topology topo;
  topo.num_tds = num_tds;
  topo.num_ads = num_ads;
  topo.region_side_m = region_side_m;
  topo.base_station = {region_side_m / 2.0, region_side_m / 2.0};

  std::uniform_real_distribution<double> coord(0.0, region_side_m);
  auto place = [&](std::vector<Position>& pos, std::vector<double>& dist, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      Position p;
      do {
        p = {coord(rng), coord(rng)};
      } while (distance(p, topo.base_station) < min_distance_m);
      pos.push_back(p);
      dist.push_back(distance(p, topo.base_station));
    }
  };
  place(topo.td_positions, topo.td_distances_m, num_tds);
  place(topo.ad_positions, topo.ad_distances_m, num_ads);
  return topo;
}

void TaskSpec::validate() const {
  require(data_bits > 0.0, "task data size must be positive");
  require(cycles > 0.0, "task workload must be positive");
  require(!result_weights.empty(), "task needs at least one result");
  require(result_weights.size() <= 64, "at most 64 results per task are supported");
  double sum = 0.0;
  for (double w : result_weights) {
    require(w >= 0.0, "result weights must be nonnegative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "result weights must sum to 1");
  require(shared_cycles_frac >= 0.0 && shared_cycles_frac < 1.0, "shared workload fraction outside [0,1)");
  require(shared_data_frac >= 0.0 && shared_data_frac < 1.0, "shared data fraction outside [0,1)");
  require(deadline_s > 0.0, "deadline must be positive");
}

void RadioParams::validate() const {
  require(bandwidth_hz > 0.0 && noise_w > 0.0 && td_tx_power_w > 0.0 && bs_tx_power_w > 0.0,
          "radio bandwidth, noise and powers must be positive");
  require(path_loss_exponent > 0.0 && antenna_gain > 0.0 && carrier_hz > 0.0,
          "path-loss parameters must be positive");
  require(los_fraction > 0.0 && los_fraction <= 1.0, "line-of-sight fraction must be in (0,1]");
}

void SystemState::validate() const {
  const std::size_t n = td_hz.size();
  require(gains.td_uplink.size() == n && gains.td_downlink.size() == n && es_hz.size() == n,
          "per-TD state arrays disagree in length");
  require(gains.ad_downlink.size() == ad_hz.size(), "per-AD state arrays disagree in length");
  for (const auto* v : {&gains.td_uplink, &gains.td_downlink, &gains.ad_downlink})
    for (double g : *v) require(g >= 0.0, "channel gains must be nonnegative");
  for (const auto* v : {&es_hz, &ad_hz, &td_hz})
    for (double f : *v) require(f > 0.0, "cpu frequencies must be positive");
}

double mean_channel_gain(const RadioParams& radio, double distance_m) {
  require(distance_m > 0.0, "distance must be positive");
  const double ratio = kSpeedOfLight / (4.0 * std::numbers::pi * radio.carrier_hz * distance_m);
  return radio.antenna_gain * std::pow(ratio, radio.path_loss_exponent);
}

double sample_rician_gain(double mean_gain, double los_fraction, Rng& rng) {
  require(mean_gain >= 0.0, "mean gain must be nonnegative");
  require(los_fraction > 0.0 && los_fraction <= 1.0, "line-of-sight fraction must be in (0,1]");
  const double los_power = los_fraction * mean_gain;
  const double scatter_power = mean_gain - los_power;
  // Draw both normals unconditionally so the stream does not depend on los_fraction.
  std::normal_distribution<double> normal(0.0, 1.0);
  const double g1 = normal(rng);
  const double g2 = normal(rng);
  if (scatter_power <= 0.0) return los_power;
  const double mu = std::sqrt(los_power);
  const double s = std::sqrt(scatter_power / 2.0);
  const double re = mu + s * g1;
  const double im = s * g2;
  return re * re + im * im;
}

ChannelGains sample_channel_state(const Topology& topology, const RadioParams& radio, Rng& rng) {
  ChannelGains gains;
  gains.td_uplink.reserve(topology.num_tds);
  gains.td_downlink.reserve(topology.num_tds);
  gains.ad_downlink.reserve(topology.num_ads);
  for (double d : topology.td_distances_m) {
    const double g = sample_rician_gain(mean_channel_gain(radio, d), radio.los_fraction, rng);
    gains.td_uplink.push_back(g);
    gains.td_downlink.push_back(g);
  }
  for (double d : topology.ad_distances_m)
    gains.ad_downlink.push_back(sample_rician_gain(mean_channel_gain(radio, d), radio.los_fraction, rng));
  return gains;
}

ResourceDraw sample_resource_state(std::size_t num_tds, std::size_t num_ads,
                                   const ResourceRanges& ranges, Rng& rng) {
  require(ranges.es_hz.lo <= ranges.es_hz.hi, "edge server range lower bound exceeds upper bound");
  require(ranges.ad_hz.lo <= ranges.ad_hz.hi, "auxiliary device range lower bound exceeds upper bound");
  ResourceDraw draw;
  draw.es_hz.reserve(num_tds);
  draw.ad_hz.reserve(num_ads);
  for (std::size_t i = 0; i < num_tds; ++i) draw.es_hz.push_back(uniform(ranges.es_hz, rng));
  for (std::size_t i = 0; i < num_ads; ++i) draw.ad_hz.push_back(uniform(ranges.ad_hz, rng));
  return draw;
}

FeatureScaling default_feature_scaling(const RadioParams& radio) {
  return {mean_channel_gain(radio, 10.0), 2.0e9};
}

std::vector<double> encode_state(const SystemState& state, const FeatureScaling& scaling) {
  const std::size_t n = state.num_tds();
  const std::size_t m = state.num_ads();
  std::vector<double> out;
  out.reserve(3 * n + 2 * m);
  for (double g : state.gains.td_uplink) out.push_back(g / scaling.reference_gain);
  for (double g : state.gains.td_downlink) out.push_back(g / scaling.reference_gain);
  for (double g : state.gains.ad_downlink) out.push_back(g / scaling.reference_gain);
  for (double f : state.es_hz) out.push_back(f / scaling.reference_hz);
  for (double f : state.ad_hz) out.push_back(f / scaling.reference_hz);
  return out;
}

SystemState decode_state(std::span<const double> features, std::size_t num_tds,
                         std::size_t num_ads, const FeatureScaling& scaling,
                         std::vector<double> td_hz) {
  require(features.size() == 3 * num_tds + 2 * num_ads, "feature vector has wrong length");
  require(td_hz.size() == num_tds, "static TD frequencies do not match num_tds");
  SystemState s;
  auto take = [&](std::size_t offset, std::size_t count, double scale) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = features[offset + i] * scale;
    return v;
  };
  std::size_t off = 0;
  s.gains.td_uplink = take(off, num_tds, scaling.reference_gain);
  off += num_tds;
  s.gains.td_downlink = take(off, num_tds, scaling.reference_gain);
  off += num_tds;
  s.gains.ad_downlink = take(off, num_ads, scaling.reference_gain);
  off += num_ads;
  s.es_hz = take(off, num_tds, scaling.reference_hz);
  off += num_tds;
  s.ad_hz = take(off, num_ads, scaling.reference_hz);
  s.td_hz = std::move(td_hz);
  return s;
}

std::vector<TaskSpec> random_tasks(std::size_t num_tds, const TaskRanges& ranges, Rng& rng) {
  require(ranges.min_results >= 1 && ranges.min_results <= ranges.max_results,
          "result count range is invalid");
  std::uniform_int_distribution<std::size_t> results(ranges.min_results, ranges.max_results);
  std::vector<TaskSpec> tasks;
  tasks.reserve(num_tds);
  for (std::size_t n = 0; n < num_tds; ++n) {
    TaskSpec t;
    t.id = n;
    t.data_bits = uniform(ranges.data_bits, rng);
    t.cycles = uniform(ranges.cycles, rng);
    const std::size_t k = results(rng);
    t.result_weights.assign(k, 1.0 / static_cast<double>(k));
    t.shared_cycles_frac = ranges.shared_cycles_frac;
    t.shared_data_frac = ranges.shared_data_frac;
    t.deadline_s = ranges.deadline_s;
    t.validate();
    tasks.push_back(std::move(t));
  }
  return tasks;
}

Environment::Environment(const EnvironmentConfig& config) : config_(config), rng_(config.seed) {
  config_.radio.validate();
  topology_ = random_topology(config_.num_tds, config_.num_ads, config_.region_side_m,
                              config_.min_distance_m, rng_);
  tasks_ = random_tasks(config_.num_tds, config_.tasks, rng_);
  state_.td_hz.reserve(config_.num_tds);
  for (std::size_t i = 0; i < config_.num_tds; ++i)
    state_.td_hz.push_back(uniform(config_.resources.td_hz, rng_));
  state_.frame = 0;
  state_.gains = sample_channel_state(topology_, config_.radio, rng_);
  auto draw = sample_resource_state(config_.num_tds, config_.num_ads, config_.resources, rng_);
  state_.es_hz = std::move(draw.es_hz);
  state_.ad_hz = std::move(draw.ad_hz);
  state_.validate();
}

const SystemState& Environment::advance_frame() {
  state_.frame += 1;
  state_.gains = sample_channel_state(topology_, config_.radio, rng_);
  auto draw = sample_resource_state(config_.num_tds, config_.num_ads, config_.resources, rng_);
  state_.es_hz = std::move(draw.es_hz);
  state_.ad_hz = std::move(draw.ad_hz);
  return state_;
}

}  // namespace mecpart
