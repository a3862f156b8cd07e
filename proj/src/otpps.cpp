#include "mecpart/otpps.hpp"

#include <chrono>
#include <numeric>

#include "mecpart/error.hpp"

namespace mecpart {

ActionEvaluation evaluate_action(std::span<const TaskSpec> tasks, const PartitionAction& action,
                                 const SystemState& state, const RadioParams& radio) {
  ActionEvaluation e;
  e.matrix = build_delay_matrix(tasks, action, state, radio);
  e.schedule = fdmts(e.matrix);
  return e;
}

std::vector<PartitionAction> quantize(const RelaxedAction& relaxed, QuantizerKind kind, std::size_t num_quantized) {
  if (kind == QuantizerKind::KMeans) return kmeans_quantize(relaxed);
  return stq_quantize(relaxed, num_quantized);
}

FrameDecision decide_from_relaxed(RelaxedAction relaxed, const SystemState& state, std::size_t num_quantized,
                                  std::span<const TaskSpec> tasks, const RadioParams& radio, QuantizerKind kind) {
  FrameDecision d;
  d.relaxed = std::move(relaxed);
  const auto raw = quantize(d.relaxed, kind, num_quantized);
  const auto counts = results_per_task(tasks);
  auto candidates = filter_candidates(raw, counts, state.num_ads());
  if (candidates.empty()) {
    candidates.push_back({nosp_action(tasks), raw.size()});
    d.fallback = true;
  }
  // Candidates are independent; the argmin runs over index order so the
  // result does not depend on evaluation order.
  std::optional<std::size_t> best;
  ActionEvaluation best_eval;
  d.candidates.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ActionEvaluation eval;
    try {
      eval = evaluate_action(tasks, candidates[i].action, state, radio);
    } catch (const InfeasibleError&) {
      // Passes the counting limits but no one-to-one placement exists.
      d.candidates.push_back({candidates[i].action, candidates[i].source, ExtendedDelay::forbidden()});
      continue;
    }
    d.candidates.push_back({candidates[i].action, candidates[i].source, eval.schedule.bottleneck});
    if (!best || eval.schedule.bottleneck < d.candidates[*best].bottleneck) {
      best = i;
      best_eval = std::move(eval);
    }
  }
  if (!best) {
    const auto fallback = nosp_action(tasks);
    best_eval = evaluate_action(tasks, fallback, state, radio);
    d.candidates.push_back({fallback, raw.size(), best_eval.schedule.bottleneck});
    best = d.candidates.size() - 1;
    d.fallback = true;
  }
  d.action = d.candidates[*best].action;
  d.matrix = std::move(best_eval.matrix);
  d.schedule = std::move(best_eval.schedule);
  return d;
}

FrameDecision otpps_frame(const SystemState& state, const Mlp& net, std::size_t num_quantized,
                          std::span<const TaskSpec> tasks, const RadioParams& radio, const FeatureScaling& scaling,
                          QuantizerKind kind) {
  const auto features = encode_state(state, scaling);
  const auto out = net.forward(features);
  const auto counts = results_per_task(tasks);
  return decide_from_relaxed(RelaxedAction::from_flat(out, counts), state, num_quantized, tasks, radio, kind);
}

bool training_schedule(std::uint64_t t, std::size_t buffer_size, std::size_t capacity, std::size_t interval) {
  if (interval == 0) return false;
  return 2 * buffer_size > capacity && t % interval == 0;
}

std::vector<std::size_t> network_shape(std::size_t num_tds, std::size_t num_ads, std::span<const TaskSpec> tasks,
                                       std::span<const std::size_t> hidden) {
  std::vector<std::size_t> shape;
  shape.push_back(3 * num_tds + 2 * num_ads);
  shape.insert(shape.end(), hidden.begin(), hidden.end());
  std::size_t outputs = 0;
  for (const auto& t : tasks) outputs += t.num_results();
  shape.push_back(outputs);
  return shape;
}

namespace {

Mlp init_network(std::span<const TaskSpec> tasks, std::size_t num_ads, const LearnerConfig& cfg, Rng& rng) {
  return Mlp::random(network_shape(tasks.size(), num_ads, tasks, cfg.hidden), rng);
}

}  // namespace

OtppsAgent::OtppsAgent(std::vector<TaskSpec> tasks, std::size_t num_ads, RadioParams radio, FeatureScaling scaling,
                       LearnerConfig config, std::uint64_t seed)
    : tasks_(std::move(tasks)),
      num_ads_(num_ads),
      radio_(radio),
      scaling_(scaling),
      config_(std::move(config)),
      rng_(seed),
      net_(init_network(tasks_, num_ads_, config_, rng_)),
      adam_(net_.num_params(), config_.adam),
      buffer_(config_.replay_capacity) {
  if (config_.num_quantized == 0) throw ParameterError("Q must be at least 1");
  if (config_.batch_size == 0) throw ParameterError("batch size must be positive");
}

FrameDecision OtppsAgent::decide(const SystemState& state) const {
  return otpps_frame(state, net_, config_.num_quantized, tasks_, radio_, scaling_, config_.quantizer);
}

OtppsAgent::StepResult OtppsAgent::step(const SystemState& state) {
  const auto start = std::chrono::steady_clock::now();
  StepResult r{decide(state), std::nullopt, 0.0};
  r.decision_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  buffer_.push(encode_state(state, scaling_), normalize_action(r.decision.action).flat());
  if (training_schedule(state.frame, buffer_.size(), buffer_.capacity(), config_.train_interval)) {
    const std::size_t n = std::min(config_.batch_size, buffer_.size());
    const auto batch = buffer_.sample(n, rng_);
    r.loss = train_step(net_, adam_, batch);
  }
  return r;
}

}  // namespace mecpart
