#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mecpart/assignment.hpp"
#include "mecpart/mlp.hpp"
#include "mecpart/partition.hpp"
#include "mecpart/quantizer.hpp"
#include "mecpart/replay.hpp"

namespace mecpart {

enum class QuantizerKind { Stq, KMeans };

struct CandidateEvaluation {
  PartitionAction action;
  std::size_t source = 0;
  ExtendedDelay bottleneck;
};

struct FrameDecision {
  RelaxedAction relaxed;
  PartitionAction action;
  DelayMatrix matrix;
  Schedule schedule;
  std::vector<CandidateEvaluation> candidates;
  bool fallback = false;  // no candidate survived filtering; NOSP used

  const ExtendedDelay& bottleneck() const { return schedule.bottleneck; }
};

struct ActionEvaluation {
  DelayMatrix matrix;
  Schedule schedule;
};

/// Builds the delay matrix for `action` and schedules it with fdmts.
ActionEvaluation evaluate_action(std::span<const TaskSpec> tasks, const PartitionAction& action,
                                 const SystemState& state, const RadioParams& radio);

/// Candidate generation from a relaxed action.
std::vector<PartitionAction> quantize(const RelaxedAction& relaxed, QuantizerKind kind, std::size_t num_quantized);

/// One decision: forward pass, quantization, filtering, fdmts per candidate,
/// argmin of the bottleneck (lowest candidate index on ties).
FrameDecision otpps_frame(const SystemState& state, const Mlp& net, std::size_t num_quantized,
                          std::span<const TaskSpec> tasks, const RadioParams& radio, const FeatureScaling& scaling,
                          QuantizerKind kind = QuantizerKind::Stq);

/// Decision for an already-computed relaxed action.
FrameDecision decide_from_relaxed(RelaxedAction relaxed, const SystemState& state, std::size_t num_quantized,
                                  std::span<const TaskSpec> tasks, const RadioParams& radio, QuantizerKind kind);

/// True iff the buffer holds more than half its capacity and t % interval == 0.
bool training_schedule(std::uint64_t t, std::size_t buffer_size, std::size_t capacity, std::size_t interval);

struct LearnerConfig {
  std::vector<std::size_t> hidden{120, 80};
  AdamConfig adam;
  std::size_t batch_size = 128;
  std::size_t train_interval = 10;
  std::size_t replay_capacity = 1024;
  std::size_t num_quantized = 8;
  QuantizerKind quantizer = QuantizerKind::Stq;
};

/// The online learner: acts on each frame, stores the chosen action and
/// trains the network on replayed samples.
class OtppsAgent {
 public:
  OtppsAgent(std::vector<TaskSpec> tasks, std::size_t num_ads, RadioParams radio, FeatureScaling scaling,
             LearnerConfig config, std::uint64_t seed);

  struct StepResult {
    FrameDecision decision;
    std::optional<double> loss;  // set when a training step ran
    double decision_seconds = 0.0;
  };

  /// Acts on `state` (t = state.frame), stores the sample, maybe trains.
  StepResult step(const SystemState& state);

  /// Acts without learning.
  FrameDecision decide(const SystemState& state) const;

  const Mlp& network() const { return net_; }
  Mlp& network() { return net_; }
  const AdamState& adam() const { return adam_; }
  AdamState& adam() { return adam_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const LearnerConfig& config() const { return config_; }
  std::span<const TaskSpec> tasks() const { return tasks_; }

 private:
  std::vector<TaskSpec> tasks_;
  std::size_t num_ads_;
  RadioParams radio_;
  FeatureScaling scaling_;
  LearnerConfig config_;
  Rng rng_;
  Mlp net_;
  AdamState adam_;
  ReplayBuffer buffer_;
};

std::vector<std::size_t> network_shape(std::size_t num_tds, std::size_t num_ads,
                                       std::span<const TaskSpec> tasks, std::span<const std::size_t> hidden);

}  // namespace mecpart
