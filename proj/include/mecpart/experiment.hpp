#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecpart/config.hpp"
#include "mecpart/otpps.hpp"

namespace mecpart {

/// Per-frame outcome of one algorithm.
struct AlgorithmOutcome {
  bool feasible = false;
  double mnd = 0.0;        // max eta over TDs (+inf when infeasible)
  double mean_eta = 0.0;
  std::optional<double> jain;
  std::vector<double> completion_s;
};

AlgorithmOutcome outcome_from_schedule(const Schedule& schedule);
AlgorithmOutcome infeasible_outcome();

struct FrameRecord {
  std::uint64_t t = 0;
  std::vector<double> completion_s;  // L_n
  std::vector<double> eta;           // L_n / T_max
  double mnd = 0.0;
  double mean_eta = 0.0;
  std::optional<double> jain;
  PartitionAction action;
  std::size_t candidates = 0;        // Q'
  bool fallback = false;
  std::optional<double> loss;
  std::optional<double> exhaustive_mnd;
  std::map<std::string, AlgorithmOutcome> algorithms;  // compare runs only
  std::optional<double> decision_seconds;              // wall clock
};

FrameRecord record_from_decision(std::uint64_t t, const FrameDecision& decision);

/// One JSON object per record. Timing is emitted only when `include_timing`.
nlohmann::json to_json(const FrameRecord& record, bool include_timing);

struct OracleResult {
  ExtendedDelay bottleneck;
  PartitionAction action;
  std::size_t actions_evaluated = 0;  // actions whose matrix was solved
  std::size_t actions_feasible = 0;
};

/// Minimum fdmts bottleneck over every feasible canonical action. The first
/// action (enumeration order) attaining the minimum is returned. Throws
/// ParameterError when sum N_res exceeds `cap`.
OracleResult brute_force_oracle(const SystemState& state, std::span<const TaskSpec> tasks, const RadioParams& radio,
                                std::size_t cap);

struct TrainingHooks {
  std::function<void(const FrameRecord&)> on_record;
  std::function<void(const OtppsAgent&, std::uint64_t t)> on_checkpoint;
};

struct TrainingSummary {
  std::size_t frames = 0;
  std::size_t training_steps = 0;
  double mean_mnd = 0.0;
  std::vector<TaskSpec> tasks;
};

/// Runs the online learner for run.frames frames (t = 1..I_max) with
/// co-evaluation of the brute-force optimum every run.exhaustive_every frames.
TrainingSummary run_training(const ExperimentConfig& config, const TrainingHooks& hooks = {},
                             OtppsAgent* agent_out = nullptr);

/// Decisions of a fixed network on run.frames fresh frames (no learning).
std::vector<FrameRecord> run_evaluation(const ExperimentConfig& config, const Mlp& net);

struct AlgorithmSummary {
  std::string name;
  std::size_t frames = 0;
  std::size_t infeasible = 0;
  double mean_mnd = 0.0;      // over feasible frames
  double mean_eta = 0.0;
  double mean_jain = 0.0;
};

struct Comparison {
  std::vector<std::string> algorithms;
  std::vector<FrameRecord> frames;  // evaluation frames only
  std::vector<AlgorithmSummary> summary;

  std::vector<double> mnd_series(const std::string& name) const;
  const AlgorithmSummary& summary_of(const std::string& name) const;
};

/// All algorithms on identical states. OTPPS and KMEANS learn online during
/// both warmup and evaluation frames; only evaluation frames are recorded.
/// GREEDY, RANDOM and KM schedule the OTPPS action; LOCAL runs NOSP tasks
/// whole on their edge-server slice. Throws ParameterError when EXHAUSTIVE is
/// requested above the size cap.
Comparison compare_algorithms(const ExperimentConfig& config,
                              const std::function<void(const FrameRecord&)>& on_record = {});

struct TimingSummary {
  std::size_t num_tds = 0;
  std::size_t num_ads = 0;
  std::size_t frames = 0;
  double mean_s = 0.0;
  double p50_s = 0.0;
  double p95_s = 0.0;
  double max_s = 0.0;
};

/// Wall time of otpps_frame over `frames` frames after `warmup` untimed ones.
TimingSummary measure_decision_time(const ExperimentConfig& config, std::size_t frames, std::size_t warmup = 10);

/// measure_decision_time for N = 2..6 (other settings from `config`).
std::vector<TimingSummary> decision_time_series(const ExperimentConfig& config, std::size_t frames,
                                                std::size_t lo = 2, std::size_t hi = 6);

/// 200-frame style moving average over a sparse series: entry i averages the
/// samples with t in (t_i - window, t_i].
std::vector<double> moving_average(std::span<const std::uint64_t> t, std::span<const double> values,
                                   std::uint64_t window);

/// Earliest sample index after which the moving average stays within
/// `tolerance` (relative) of its final value.
std::size_t convergence_index(std::span<const double> averaged, double tolerance);

nlohmann::json checkpoint_json(const OtppsAgent& agent, std::uint64_t t, std::uint64_t seed);
void save_checkpoint(const std::filesystem::path& path, const OtppsAgent& agent, std::uint64_t t, std::uint64_t seed);

struct Checkpoint {
  std::uint64_t t = 0;
  std::uint64_t seed = 0;
  Mlp net{std::vector<std::size_t>{1, 1}};
  AdamState adam;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Config, seed, code version and selected kernels.
nlohmann::json run_manifest(const ExperimentConfig& config, const std::string& command);

const char* version_string();

}  // namespace mecpart
