#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mecpart {

using Rng = std::mt19937_64;

inline constexpr double kSpeedOfLight = 3.0e8;

struct Position {
  double x = 0.0;
  double y = 0.0;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Device placement: N task devices (TDs), M auxiliary devices (ADs) and the
/// base station inside a square region. Distances are to the base station.
struct Topology {
  std::size_t num_tds = 0;
  std::size_t num_ads = 0;
  double region_side_m = 200.0;
  Position base_station;
  std::vector<Position> td_positions;
  std::vector<Position> ad_positions;
  std::vector<double> td_distances_m;
  std::vector<double> ad_distances_m;

  void validate() const;
};

/// Places devices uniformly in the square with the base station at the
/// center, rejecting draws closer than `min_distance_m`.
Topology random_topology(std::size_t num_tds, std::size_t num_ads, double region_side_m,
                         double min_distance_m, Rng& rng);

/// A result-partitioned task. Workload and data are split with a shared
/// prefix (duplicated in every partition) plus per-result exclusive shares.
struct TaskSpec {
  std::size_t id = 0;
  double data_bits = 0.0;
  double cycles = 0.0;
  std::vector<double> result_weights;
  double shared_cycles_frac = 0.1;
  double shared_data_frac = 0.1;
  double deadline_s = 1.0;

  std::size_t num_results() const { return result_weights.size(); }
  void validate() const;
};

struct RadioParams {
  double bandwidth_hz = 5.0e6;
  double noise_w = 1.0e-10;
  double td_tx_power_w = 0.1;
  double bs_tx_power_w = 1.5;
  double path_loss_exponent = 3.0;
  double antenna_gain = 4.11;
  double carrier_hz = 915.0e6;
  double los_fraction = 0.3;

  void validate() const;
};

/// Composite channel power gains for one frame.
struct ChannelGains {
  std::vector<double> td_uplink;
  std::vector<double> td_downlink;
  std::vector<double> ad_downlink;
};

struct ResourceRanges {
  Range es_hz{1.0e9, 2.0e9};
  Range ad_hz{0.2e9, 1.6e9};
  Range td_hz{0.4e9, 0.6e9};
};

struct ResourceDraw {
  std::vector<double> es_hz;  // per-TD slice of the edge server
  std::vector<double> ad_hz;
};

/// Per-frame snapshot. Only gains and the ES/AD provisioning vary in time.
struct SystemState {
  std::uint64_t frame = 0;
  ChannelGains gains;
  std::vector<double> es_hz;
  std::vector<double> ad_hz;
  std::vector<double> td_hz;

  std::size_t num_tds() const { return td_hz.size(); }
  std::size_t num_ads() const { return ad_hz.size(); }
  void validate() const;
};

/// Average path-loss gain A_d * (c / (4 pi f_c d))^exponent.
double mean_channel_gain(const RadioParams& radio, double distance_m);

/// |x|^2 with x Rician: line-of-sight power los_fraction * mean_gain, the rest
/// scattered as circularly symmetric complex Gaussian.
double sample_rician_gain(double mean_gain, double los_fraction, Rng& rng);

/// TD uplink and downlink share one draw per frame (reciprocity).
ChannelGains sample_channel_state(const Topology& topology, const RadioParams& radio, Rng& rng);

ResourceDraw sample_resource_state(std::size_t num_tds, std::size_t num_ads,
                                   const ResourceRanges& ranges, Rng& rng);

struct FeatureScaling {
  double reference_gain = 1.0;
  double reference_hz = 2.0e9;
};

/// Reference gain used for feature scaling: mean gain at 10 m.
FeatureScaling default_feature_scaling(const RadioParams& radio);

/// Layout: [uplink per TD, downlink per TD, AD downlink, ES slices, AD cycles],
/// length 3N + 2M.
std::vector<double> encode_state(const SystemState& state, const FeatureScaling& scaling);

/// Inverse of encode_state. Static TD frequencies are not part of the vector
/// and are taken from `td_hz`.
SystemState decode_state(std::span<const double> features, std::size_t num_tds,
                         std::size_t num_ads, const FeatureScaling& scaling,
                         std::vector<double> td_hz);

struct TaskRanges {
  Range data_bits{300.0 * 8192.0, 500.0 * 8192.0};
  Range cycles{30.0e6, 80.0e6};
  std::size_t min_results = 3;
  std::size_t max_results = 4;
  double shared_cycles_frac = 0.1;
  double shared_data_frac = 0.1;
  double deadline_s = 1.0;
};

struct EnvironmentConfig {
  std::size_t num_tds = 2;
  std::size_t num_ads = 3;
  double region_side_m = 200.0;
  double min_distance_m = 10.0;
  TaskRanges tasks;
  RadioParams radio;
  ResourceRanges resources;
  std::uint64_t seed = 1;
};

std::vector<TaskSpec> random_tasks(std::size_t num_tds, const TaskRanges& ranges, Rng& rng);

/// Owns topology, tasks and the random source; produces one SystemState per
/// frame. Single writer: not safe to advance from several threads.
class Environment {
 public:
  explicit Environment(const EnvironmentConfig& config);

  /// Increments t and resamples channels and resources.
  const SystemState& advance_frame();

  /// Restarts the per-frame random stream; topology and tasks are kept.
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  const SystemState& state() const { return state_; }
  const Topology& topology() const { return topology_; }
  const std::vector<TaskSpec>& tasks() const { return tasks_; }
  const RadioParams& radio() const { return config_.radio; }
  const EnvironmentConfig& config() const { return config_; }

 private:
  EnvironmentConfig config_;
  Rng rng_;
  Topology topology_;
  std::vector<TaskSpec> tasks_;
  SystemState state_;
};

}  // namespace mecpart
