#include "mecpart/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "mecpart/error.hpp"
#include "mecpart/kernels.hpp"
#include "mecpart/metrics.hpp"

#ifndef MECPART_VERSION
#define MECPART_VERSION "unknown"
#endif

namespace mecpart {

using nlohmann::json;

const char* version_string() { return MECPART_VERSION; }

AlgorithmOutcome outcome_from_schedule(const Schedule& schedule) {
  AlgorithmOutcome o;
  o.feasible = true;
  o.completion_s = schedule.completion.seconds;
  double sum = 0.0;
  for (const auto& e : schedule.completion.eta) {
    o.mnd = std::max(o.mnd, e.ratio);
    sum += e.ratio;
  }
  o.mean_eta = schedule.completion.eta.empty() ? 0.0 : sum / static_cast<double>(schedule.completion.eta.size());
  o.jain = try_jain_index(o.completion_s);
  return o;
}

AlgorithmOutcome infeasible_outcome() {
  AlgorithmOutcome o;
  o.mnd = std::numeric_limits<double>::infinity();
  o.mean_eta = std::numeric_limits<double>::infinity();
  return o;
}

FrameRecord record_from_decision(std::uint64_t t, const FrameDecision& decision) {
  FrameRecord r;
  r.t = t;
  const auto o = outcome_from_schedule(decision.schedule);
  r.completion_s = o.completion_s;
  for (const auto& e : decision.schedule.completion.eta) r.eta.push_back(e.ratio);
  r.mnd = o.mnd;
  r.mean_eta = o.mean_eta;
  r.jain = o.jain;
  r.action = decision.action;
  r.candidates = decision.candidates.size();
  r.fallback = decision.fallback;
  return r;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json outcome_json(const AlgorithmOutcome& o) {
  json j{{"feasible", o.feasible}, {"mnd", number_or_null(o.mnd)}, {"mean_eta", number_or_null(o.mean_eta)}};
  j["jain"] = o.jain ? json(*o.jain) : json(nullptr);
  return j;
}

}  // namespace

json to_json(const FrameRecord& r, bool include_timing) {
  json j;
  j["t"] = r.t;
  j["L"] = r.completion_s;
  j["eta"] = r.eta;
  j["mnd"] = number_or_null(r.mnd);
  j["mean_eta"] = number_or_null(r.mean_eta);
  j["jain"] = r.jain ? json(*r.jain) : json(nullptr);
  j["action"] = r.action.labels;
  j["candidates"] = r.candidates;
  j["fallback"] = r.fallback;
  if (r.loss) j["loss"] = *r.loss;
  if (r.exhaustive_mnd) j["exhaustive_mnd"] = *r.exhaustive_mnd;
  if (!r.algorithms.empty()) {
    json a = json::object();
    for (const auto& [name, o] : r.algorithms) a[name] = outcome_json(o);
    j["algorithms"] = std::move(a);
  }
  if (include_timing && r.decision_seconds) j["decision_s"] = *r.decision_seconds;
  return j;
}

// ---------------------------------------------------------------------------
// Brute force

namespace {

struct TaskOption {
  std::vector<int> labels;
  std::vector<RowInfo> rows;
  // Per row: (column, delay, seconds) for every usable column.
  std::vector<std::vector<std::tuple<std::size_t, ExtendedDelay, double>>> cells;
  ExtendedDelay lower_bound = ExtendedDelay::from_ratio(0.0);  // max of the row minima
};

std::vector<TaskOption> task_options(std::size_t n, const TaskSpec& task, const SystemState& state,
                                     const RadioParams& radio) {
  const std::size_t n_tds = state.num_tds();
  const std::size_t n_ads = state.num_ads();
  std::vector<TaskOption> out;
  for (auto& labels : set_partitions(task.num_results())) {
    const auto k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end()));
    if (k > n_ads + 2) continue;
    TaskOption opt;
    const auto parts = derive_partitions(task, labels);
    opt.labels = std::move(labels);
    for (std::size_t p = 0; p < parts.size(); ++p) {
      opt.rows.push_back({n, p, parts[p].cycles, parts[p].data_bits, task.deadline_s});
      std::vector<std::tuple<std::size_t, ExtendedDelay, double>> row;
      auto add = [&](std::size_t col, Placement where) {
        const double s = partition_seconds(parts[p], where, task, n, state, radio);
        row.emplace_back(col, ExtendedDelay::from_ratio(s / task.deadline_s), s);
      };
      add(n, {Placement::Kind::Local, 0});
      for (std::size_t a = 0; a < n_ads; ++a) add(n_tds + a, {Placement::Kind::Auxiliary, a});
      add(n_tds + n_ads + n, {Placement::Kind::EdgeServer, 0});
      ExtendedDelay row_min = ExtendedDelay::forbidden();
      for (const auto& c : row)
        if (std::get<1>(c) < row_min) row_min = std::get<1>(c);
      if (opt.lower_bound < row_min) opt.lower_bound = row_min;
      opt.cells.push_back(std::move(row));
    }
    out.push_back(std::move(opt));
  }
  return out;
}

}  // namespace

OracleResult brute_force_oracle(const SystemState& state, std::span<const TaskSpec> tasks, const RadioParams& radio,
                                std::size_t cap) {
  std::size_t total = 0;
  for (const auto& t : tasks) total += t.num_results();
  if (total > cap)
    throw ParameterError("exhaustive search refused: " + std::to_string(total) + " results in total exceed the cap of " +
                         std::to_string(cap));
  const std::size_t n_tds = tasks.size();
  const std::size_t n_ads = state.num_ads();
  if (n_tds == 0) throw ParameterError("exhaustive search needs at least one task");
  if (state.num_tds() != n_tds) throw ParameterError("tasks and state disagree on the number of task devices");
  const std::size_t budget = 2 * n_tds + n_ads;

  std::vector<std::vector<TaskOption>> options;
  for (std::size_t n = 0; n < n_tds; ++n) {
    options.push_back(task_options(n, tasks[n], state, radio));
    if (options.back().empty()) throw InfeasibleError("task " + std::to_string(n) + " has no feasible partitioning");
  }

  OracleResult best;
  best.bottleneck = ExtendedDelay::forbidden();
  bool have = false;
  std::vector<std::size_t> idx(n_tds, 0);
  bool done = false;
  while (!done) {
    std::size_t parts = 0;
    ExtendedDelay lb = ExtendedDelay::from_ratio(0.0);
    for (std::size_t n = 0; n < n_tds; ++n) {
      const auto& opt = options[n][idx[n]];
      parts += opt.rows.size();
      if (lb < opt.lower_bound) lb = opt.lower_bound;
    }
    if (parts <= budget) {
      ++best.actions_feasible;
      // An action whose row-minimum bound is not below the incumbent cannot
      // replace it (ties keep the earlier action).
      if (!have || lb < best.bottleneck) {
        std::vector<RowInfo> rows;
        for (std::size_t n = 0; n < n_tds; ++n)
          rows.insert(rows.end(), options[n][idx[n]].rows.begin(), options[n][idx[n]].rows.end());
        DelayMatrix m(n_tds, n_ads, std::move(rows));
        std::size_t r = 0;
        for (std::size_t n = 0; n < n_tds; ++n)
          for (const auto& row : options[n][idx[n]].cells) {
            for (const auto& [c, d, s] : row) m.set(r, c, d, s);
            ++r;
          }
        ++best.actions_evaluated;
        ExtendedDelay value;
        try {
          value = bottleneck_threshold(m);
        } catch (const InfeasibleError&) {
          value = ExtendedDelay::forbidden();
        }
        if (!value.is_forbidden() && (!have || value < best.bottleneck)) {
          have = true;
          best.bottleneck = value;
          best.action.labels.clear();
          for (std::size_t n = 0; n < n_tds; ++n) best.action.labels.push_back(options[n][idx[n]].labels);
        }
      }
    }
    // Odometer, last task fastest.
    std::size_t n = n_tds;
    while (true) {
      if (n == 0) {
        done = true;
        break;
      }
      --n;
      if (++idx[n] < options[n].size()) break;
      idx[n] = 0;
    }
  }
  if (!have) throw InfeasibleError("no feasible action");
  return best;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

Environment make_environment(const ExperimentConfig& config) {
  auto env_cfg = config.environment;
  env_cfg.seed = derive_seed(config.seed, 0);
  return Environment(env_cfg);
}

std::size_t total_results(std::span<const TaskSpec> tasks) {
  std::size_t total = 0;
  for (const auto& t : tasks) total += t.num_results();
  return total;
}

void check_exhaustive_budget(const ExperimentConfig& config, std::span<const TaskSpec> tasks) {
  if (config.run.exhaustive_every == 0) return;
  const auto total = total_results(tasks);
  if (total > config.run.exhaustive_cap)
    throw ConfigError("exhaustive co-evaluation refused: " + std::to_string(total) +
                      " results exceed run.exhaustive_cap = " + std::to_string(config.run.exhaustive_cap) +
                      " (set run.exhaustive_every to 0 or raise the cap)");
}

bool exhaustive_due(const RunConfig& run, std::uint64_t t) {
  return run.exhaustive_every != 0 && t % run.exhaustive_every == 0;
}

}  // namespace

TrainingSummary run_training(const ExperimentConfig& config, const TrainingHooks& hooks, OtppsAgent* agent_out) {
  config.validate();
  Environment env = make_environment(config);
  check_exhaustive_budget(config, env.tasks());
  OtppsAgent agent(env.tasks(), config.environment.num_ads, env.radio(), config.scaling(), config.learner,
                   derive_seed(config.seed, 1));

  TrainingSummary summary;
  summary.tasks = env.tasks();
  double mnd_sum = 0.0;
  std::uint64_t last_checkpoint = 0;
  for (std::uint64_t t = 1; t <= config.run.frames; ++t) {
    const auto& state = env.advance_frame();
    auto step = agent.step(state);
    FrameRecord rec = record_from_decision(t, step.decision);
    rec.loss = step.loss;
    if (config.run.record_timing) rec.decision_seconds = step.decision_seconds;
    if (step.loss) ++summary.training_steps;
    if (exhaustive_due(config.run, t))
      rec.exhaustive_mnd = brute_force_oracle(state, env.tasks(), env.radio(), config.run.exhaustive_cap).bottleneck.ratio;
    mnd_sum += rec.mnd;
    ++summary.frames;
    if (hooks.on_record) hooks.on_record(rec);
    if (hooks.on_checkpoint && config.run.checkpoint_every != 0 && t % config.run.checkpoint_every == 0) {
      hooks.on_checkpoint(agent, t);
      last_checkpoint = t;
    }
  }
  if (hooks.on_checkpoint && last_checkpoint != config.run.frames) hooks.on_checkpoint(agent, config.run.frames);
  summary.mean_mnd = summary.frames ? mnd_sum / static_cast<double>(summary.frames) : 0.0;
  if (agent_out) *agent_out = std::move(agent);
  return summary;
}

std::vector<FrameRecord> run_evaluation(const ExperimentConfig& config, const Mlp& net) {
  config.validate();
  Environment env = make_environment(config);
  check_exhaustive_budget(config, env.tasks());
  const auto shape = network_shape(env.tasks().size(), config.environment.num_ads, env.tasks(), config.learner.hidden);
  if (shape != net.layer_sizes()) throw ConfigError("network shape does not match the configured system");
  // Same topology and tasks as training, fresh channel and resource draws.
  env.reseed(derive_seed(config.seed, 5));
  const auto scaling = config.scaling();
  std::vector<FrameRecord> out;
  out.reserve(config.run.frames);
  for (std::uint64_t t = 1; t <= config.run.frames; ++t) {
    const auto& state = env.advance_frame();
    const auto start = std::chrono::steady_clock::now();
    const auto d = otpps_frame(state, net, config.learner.num_quantized, env.tasks(), env.radio(), scaling,
                               config.learner.quantizer);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    FrameRecord rec = record_from_decision(t, d);
    if (config.run.record_timing) rec.decision_seconds = elapsed;
    if (exhaustive_due(config.run, t))
      rec.exhaustive_mnd = brute_force_oracle(state, env.tasks(), env.radio(), config.run.exhaustive_cap).bottleneck.ratio;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<double> Comparison::mnd_series(const std::string& name) const {
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.algorithms.at(name).mnd);
  return out;
}

const AlgorithmSummary& Comparison::summary_of(const std::string& name) const {
  for (const auto& s : summary)
    if (s.name == name) return s;
  throw ParameterError("algorithm '" + name + "' was not part of the comparison");
}

Comparison compare_algorithms(const ExperimentConfig& config, const std::function<void(const FrameRecord&)>& on_record) {
  config.validate();
  Environment env = make_environment(config);
  const auto& tasks = env.tasks();
  const auto& radio = env.radio();
  const std::size_t n_ads = config.environment.num_ads;
  const auto& algos = config.run.algorithms;
  auto wants = [&](const char* name) { return std::find(algos.begin(), algos.end(), name) != algos.end(); };

  if (wants("EXHAUSTIVE") && total_results(tasks) > config.run.exhaustive_cap)
    throw ParameterError("EXHAUSTIVE refused: " + std::to_string(total_results(tasks)) +
                         " results exceed run.exhaustive_cap = " + std::to_string(config.run.exhaustive_cap));

  const bool need_otpps = wants("OTPPS") || wants("GREEDY") || wants("RANDOM") || wants("KM");
  std::optional<OtppsAgent> otpps;
  std::optional<OtppsAgent> kmeans;
  if (need_otpps) otpps.emplace(tasks, n_ads, radio, config.scaling(), config.learner, derive_seed(config.seed, 1));
  if (wants("KMEANS")) {
    auto learner = config.learner;
    learner.quantizer = QuantizerKind::KMeans;
    kmeans.emplace(tasks, n_ads, radio, config.scaling(), learner, derive_seed(config.seed, 2));
  }
  Rng random_rng(derive_seed(config.seed, 3));

  PartitionAction mingra = mingra_action(tasks);
  if (!validate_action(mingra, tasks, n_ads)) mingra = capped_mingra_action(tasks, n_ads);
  const PartitionAction nosp = nosp_action(tasks);

  Comparison cmp;
  cmp.algorithms = algos;
  const std::uint64_t total_frames = config.run.warmup_frames + config.run.frames;
  for (std::uint64_t t = 1; t <= total_frames; ++t) {
    const auto& state = env.advance_frame();
    std::optional<OtppsAgent::StepResult> o, k;
    if (otpps) o = otpps->step(state);
    if (kmeans) k = kmeans->step(state);
    if (t <= config.run.warmup_frames) continue;

    FrameRecord rec;
    if (o) {
      rec = record_from_decision(t, o->decision);
      rec.loss = o->loss;
      if (config.run.record_timing) rec.decision_seconds = o->decision_seconds;
    } else {
      rec.t = t;
    }
    auto guarded = [](auto&& fn) {
      try {
        return outcome_from_schedule(fn());
      } catch (const InfeasibleError&) {
        return infeasible_outcome();
      }
    };
    for (const auto& name : algos) {
      AlgorithmOutcome out;
      if (name == "OTPPS") {
        out = outcome_from_schedule(o->decision.schedule);
      } else if (name == "NOSP") {
        out = guarded([&] { return evaluate_action(tasks, nosp, state, radio).schedule; });
      } else if (name == "MINGRA") {
        out = guarded([&] { return evaluate_action(tasks, mingra, state, radio).schedule; });
      } else if (name == "KMEANS") {
        out = outcome_from_schedule(k->decision.schedule);
      } else if (name == "EXHAUSTIVE") {
        const auto best = brute_force_oracle(state, tasks, radio, config.run.exhaustive_cap);
        out = outcome_from_schedule(evaluate_action(tasks, best.action, state, radio).schedule);
        rec.exhaustive_mnd = out.mnd;
      } else if (name == "GREEDY") {
        out = guarded([&] { return greedy_schedule(o->decision.matrix); });
      } else if (name == "RANDOM") {
        out = guarded([&] { return random_schedule(o->decision.matrix, random_rng); });
      } else if (name == "KM") {
        out = guarded([&] { return min_sum_assignment(o->decision.matrix); });
      } else if (name == "LOCAL") {
        out = guarded([&] { return local_schedule(tasks, state, radio); });
      } else {
        throw ConfigError("unknown algorithm '" + name + "'");
      }
      rec.algorithms[name] = std::move(out);
    }
    if (on_record) on_record(rec);
    cmp.frames.push_back(std::move(rec));
  }

  for (const auto& name : algos) {
    AlgorithmSummary s;
    s.name = name;
    double mnd = 0.0, eta = 0.0, jain = 0.0;
    std::size_t feasible = 0, jain_count = 0;
    for (const auto& f : cmp.frames) {
      const auto& o = f.algorithms.at(name);
      ++s.frames;
      if (!o.feasible) {
        ++s.infeasible;
        continue;
      }
      ++feasible;
      mnd += o.mnd;
      eta += o.mean_eta;
      if (o.jain) {
        jain += *o.jain;
        ++jain_count;
      }
    }
    s.mean_mnd = feasible ? mnd / static_cast<double>(feasible) : std::numeric_limits<double>::infinity();
    s.mean_eta = feasible ? eta / static_cast<double>(feasible) : std::numeric_limits<double>::infinity();
    s.mean_jain = jain_count ? jain / static_cast<double>(jain_count) : 0.0;
    cmp.summary.push_back(s);
  }
  return cmp;
}

// ---------------------------------------------------------------------------
// Timing

TimingSummary measure_decision_time(const ExperimentConfig& config, std::size_t frames, std::size_t warmup) {
  if (frames == 0) throw ParameterError("timing needs at least one frame");
  Environment env = make_environment(config);
  Rng rng(derive_seed(config.seed, 1));
  const Mlp net = Mlp::random(
      network_shape(env.tasks().size(), config.environment.num_ads, env.tasks(), config.learner.hidden), rng);
  const auto scaling = config.scaling();
  std::vector<double> times;
  times.reserve(frames);
  for (std::size_t i = 0; i < warmup + frames; ++i) {
    const auto& state = env.advance_frame();
    const auto start = std::chrono::steady_clock::now();
    const auto d = otpps_frame(state, net, config.learner.num_quantized, env.tasks(), env.radio(), scaling,
                               config.learner.quantizer);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (d.candidates.empty()) throw NumericError("decision produced no candidate");
    if (i >= warmup) times.push_back(elapsed);
  }
  TimingSummary s;
  s.num_tds = config.environment.num_tds;
  s.num_ads = config.environment.num_ads;
  s.frames = frames;
  s.mean_s = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  auto pct = [&](double p) {
    const auto i = static_cast<std::size_t>(std::ceil(p * static_cast<double>(times.size()))) - 1;
    return times[std::min(i, times.size() - 1)];
  };
  s.p50_s = pct(0.50);
  s.p95_s = pct(0.95);
  s.max_s = times.back();
  return s;
}

std::vector<TimingSummary> decision_time_series(const ExperimentConfig& config, std::size_t frames, std::size_t lo,
                                                std::size_t hi) {
  std::vector<TimingSummary> out;
  for (std::size_t n = lo; n <= hi; ++n) {
    auto cfg = config;
    cfg.environment.num_tds = n;
    out.push_back(measure_decision_time(cfg, frames));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Convergence helpers

std::vector<double> moving_average(std::span<const std::uint64_t> t, std::span<const double> values,
                                   std::uint64_t window) {
  if (t.size() != values.size()) throw ParameterError("moving_average: length mismatch");
  std::vector<double> out(values.size());
  double sum = 0.0;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    while (t[lo] + window <= t[i]) sum -= values[lo++];
    out[i] = sum / static_cast<double>(i - lo + 1);
  }
  return out;
}

std::size_t convergence_index(std::span<const double> averaged, double tolerance) {
  if (averaged.empty()) return 0;
  const double final_value = averaged.back();
  for (std::size_t i = averaged.size(); i > 0; --i)
    if (std::abs(averaged[i - 1] / final_value - 1.0) >= tolerance) return i;
  return 0;
}

// ---------------------------------------------------------------------------
// Persistence

json checkpoint_json(const OtppsAgent& agent, std::uint64_t t, std::uint64_t seed) {
  const auto& net = agent.network();
  const auto& adam = agent.adam();
  const auto params = net.params();
  return json{
      {"version", version_string()},
      {"t", t},
      {"seed", seed},
      {"layer_sizes", net.layer_sizes()},
      {"params", std::vector<double>(params.begin(), params.end())},
      {"adam",
       {{"learning_rate", adam.config.learning_rate},
        {"beta1", adam.config.beta1},
        {"beta2", adam.config.beta2},
        {"eps", adam.config.eps},
        {"step", adam.step},
        {"m", adam.m},
        {"v", adam.v}}},
  };
}

void save_checkpoint(const std::filesystem::path& path, const OtppsAgent& agent, std::uint64_t t, std::uint64_t seed) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw IoError("cannot write checkpoint " + tmp + " at frame " + std::to_string(t));
    out << checkpoint_json(agent, t, seed).dump() << '\n';
    if (!out) throw IoError("write failed for checkpoint " + tmp + " at frame " + std::to_string(t));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  try {
    const json j = json::parse(in);
    Checkpoint c;
    c.t = j.at("t").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.net = Mlp(j.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != c.net.num_params())
      throw IoError("checkpoint " + path.string() + ": parameter count does not match layer sizes");
    std::copy(params.begin(), params.end(), c.net.params().begin());
    const auto& a = j.at("adam");
    AdamConfig cfg;
    cfg.learning_rate = a.at("learning_rate").get<double>();
    cfg.beta1 = a.at("beta1").get<double>();
    cfg.beta2 = a.at("beta2").get<double>();
    cfg.eps = a.at("eps").get<double>();
    c.adam = AdamState(c.net.num_params(), cfg);
    c.adam.step = a.at("step").get<std::size_t>();
    c.adam.m = a.at("m").get<std::vector<double>>();
    c.adam.v = a.at("v").get<std::vector<double>>();
    if (c.adam.m.size() != c.net.num_params() || c.adam.v.size() != c.net.num_params())
      throw IoError("checkpoint " + path.string() + ": optimizer state size mismatch");
    return c;
  } catch (const json::exception& e) {
    throw IoError("checkpoint " + path.string() + " is malformed: " + e.what());
  }
}

json run_manifest(const ExperimentConfig& config, const std::string& command) {
  return json{{"command", command},
              {"version", version_string()},
              {"seed", config.seed},
              {"kernels", kernels::active_kernels().name},
              {"config", to_json(config)}};
}

}  // namespace mecpart
