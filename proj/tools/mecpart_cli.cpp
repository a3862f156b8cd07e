#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mecpart/assignment.hpp"
#include "mecpart/config.hpp"
#include "mecpart/error.hpp"
#include "mecpart/experiment.hpp"

namespace fs = std::filesystem;
using namespace mecpart;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInfeasible = 3, kIo = 4 };

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> frames;
  bool no_timing = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("-c,--config", opt.config_path, "JSON config file (defaults apply when omitted)");
  cmd->add_option("-s,--seed", opt.seed, "Override the master seed");
  cmd->add_option("-o,--out", opt.out_dir, "Output directory (overrides run.output_dir)");
  cmd->add_option("-f,--frames", opt.frames, "Override run.frames");
  cmd->add_flag("--no-timing", opt.no_timing, "Omit wall-clock fields from records");
}

ExperimentConfig resolve(const CommonOptions& opt) {
  ExperimentConfig cfg = opt.config_path.empty() ? default_config() : load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.out_dir.empty()) cfg.run.output_dir = opt.out_dir;
  if (opt.frames) cfg.run.frames = *opt.frames;
  if (opt.no_timing) cfg.run.record_timing = false;
  cfg.validate();
  return cfg;
}

fs::path prepare_output(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.run.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

class RecordWriter {
 public:
  RecordWriter(const fs::path& path, bool timing) : path_(path), out_(path), timing_(timing) {
    if (!out_) throw IoError("cannot open " + path.string());
  }
  void write(const FrameRecord& r) {
    out_ << to_json(r, timing_).dump() << '\n';
    if (!out_) throw IoError("write failed for " + path_.string() + " at frame " + std::to_string(r.t));
  }

 private:
  fs::path path_;
  std::ofstream out_;
  bool timing_;
};

int run_train(const CommonOptions& opt) {
  const auto cfg = resolve(opt);
  const auto dir = prepare_output(cfg);
  write_json(dir / "manifest.json", run_manifest(cfg, "train"));
  RecordWriter writer(dir / "records.ndjson", cfg.run.record_timing);
  TrainingHooks hooks;
  hooks.on_record = [&](const FrameRecord& r) { writer.write(r); };
  hooks.on_checkpoint = [&](const OtppsAgent& agent, std::uint64_t t) {
    save_checkpoint(dir / ("checkpoint_" + std::to_string(t) + ".json"), agent, t, cfg.seed);
    save_checkpoint(dir / "checkpoint.json", agent, t, cfg.seed);
  };
  const auto s = run_training(cfg, hooks);
  std::printf("frames %zu  training steps %zu  mean MND %.6f\n", s.frames, s.training_steps, s.mean_mnd);
  std::printf("records: %s\n", (dir / "records.ndjson").c_str());
  return kOk;
}

int run_eval(const CommonOptions& opt, const std::string& checkpoint) {
  const auto cfg = resolve(opt);
  const auto ck = load_checkpoint(checkpoint);
  const auto dir = prepare_output(cfg);
  write_json(dir / "eval_manifest.json", run_manifest(cfg, "eval"));
  RecordWriter writer(dir / "eval.ndjson", cfg.run.record_timing);
  const auto records = run_evaluation(cfg, ck.net);
  double mnd = 0.0, ratio = 0.0;
  std::size_t with_oracle = 0;
  for (const auto& r : records) {
    writer.write(r);
    mnd += r.mnd;
    if (r.exhaustive_mnd) {
      ratio += r.mnd / *r.exhaustive_mnd;
      ++with_oracle;
    }
  }
  std::printf("frames %zu  mean MND %.6f", records.size(), mnd / static_cast<double>(records.size()));
  if (with_oracle) std::printf("  mean MND / exhaustive %.6f", ratio / static_cast<double>(with_oracle));
  std::printf("\n");
  return kOk;
}

int run_compare(const CommonOptions& opt, const std::vector<std::string>& algorithms, std::optional<std::size_t> warmup) {
  auto cfg = resolve(opt);
  if (!algorithms.empty()) cfg.run.algorithms = algorithms;
  if (warmup) cfg.run.warmup_frames = *warmup;
  cfg.validate();
  const auto dir = prepare_output(cfg);
  write_json(dir / "compare_manifest.json", run_manifest(cfg, "compare"));
  RecordWriter writer(dir / "compare.ndjson", cfg.run.record_timing);
  const auto cmp = compare_algorithms(cfg, [&](const FrameRecord& r) { writer.write(r); });
  nlohmann::json summary = nlohmann::json::array();
  std::printf("%-12s %10s %10s %10s %10s\n", "algorithm", "mean MND", "mean eta", "Jain F", "infeasible");
  for (const auto& s : cmp.summary) {
    std::printf("%-12s %10.6f %10.6f %10.6f %10zu\n", s.name.c_str(), s.mean_mnd, s.mean_eta, s.mean_jain,
                s.infeasible);
    summary.push_back({{"algorithm", s.name},
                       {"frames", s.frames},
                       {"infeasible", s.infeasible},
                       {"mean_mnd", s.mean_mnd},
                       {"mean_eta", s.mean_eta},
                       {"mean_jain", s.mean_jain}});
  }
  write_json(dir / "summary.json", summary);
  return kOk;
}

int run_oracle(const CommonOptions& opt) {
  auto cfg = resolve(opt);
  auto env_cfg = cfg.environment;
  env_cfg.seed = derive_seed(cfg.seed, 0);
  Environment env(env_cfg);
  const std::size_t frames = opt.frames.value_or(1);
  for (std::size_t i = 0; i < frames; ++i) {
    const auto& state = env.advance_frame();
    const auto best = brute_force_oracle(state, env.tasks(), env.radio(), cfg.run.exhaustive_cap);
    std::ostringstream action;
    for (const auto& row : best.action.labels) {
      action << '[';
      for (std::size_t k = 0; k < row.size(); ++k) action << (k ? "," : "") << row[k];
      action << ']';
    }
    std::printf("t=%llu  optimal MND %s  action %s  (%zu feasible actions, %zu solved)\n",
                static_cast<unsigned long long>(state.frame), to_string(best.bottleneck).c_str(),
                action.str().c_str(), best.actions_feasible, best.actions_evaluated);
  }
  return kOk;
}

int run_bench(const CommonOptions& opt, bool series, std::size_t bench_frames) {
  const auto cfg = resolve(opt);
  auto show = [](const TimingSummary& s) {
    std::printf("N=%zu M=%zu frames=%zu  mean %.3f ms  p50 %.3f ms  p95 %.3f ms  max %.3f ms\n", s.num_tds, s.num_ads,
                s.frames, s.mean_s * 1e3, s.p50_s * 1e3, s.p95_s * 1e3, s.max_s * 1e3);
  };
  if (series) {
    for (const auto& s : decision_time_series(cfg, bench_frames)) show(s);
  } else {
    show(measure_decision_time(cfg, bench_frames));
  }
  return kOk;
}

int run_solve(const std::string& grid_path, bool binary) {
  std::ifstream in(grid_path);
  if (!in) throw IoError("cannot open grid " + grid_path);
  const auto m = DelayMatrix::read_grid(in);
  const auto s = fdmts(m, binary ? ThresholdSearch::Binary : ThresholdSearch::Linear);
  std::printf("bottleneck %s\n", to_string(s.bottleneck).c_str());
  for (const auto& e : s.triples(m)) std::printf("%zu %zu %s\n", e.row, e.column, to_string(e.value).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Result-partitioned task offloading: online learner, schedulers and experiment runner"};
  app.require_subcommand(1);

  CommonOptions train_opt, eval_opt, compare_opt, oracle_opt, bench_opt;
  auto* train = app.add_subcommand("train", "Run the online learner and write records and checkpoints");
  add_common(train, train_opt);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on fresh frames without learning");
  add_common(eval, eval_opt);
  std::string checkpoint;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON written by train")->required();

  auto* compare = app.add_subcommand("compare", "Run every selected algorithm on the same frames");
  add_common(compare, compare_opt);
  std::vector<std::string> algorithms;
  std::optional<std::size_t> warmup;
  compare->add_option("-a,--algorithms", algorithms, "Algorithms (OTPPS NOSP MINGRA KMEANS EXHAUSTIVE GREEDY RANDOM KM LOCAL)")
      ->delimiter(',');
  compare->add_option("--warmup", warmup, "Learning frames before recording starts");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum for the first frames of a seeded environment");
  add_common(oracle, oracle_opt);

  auto* bench = app.add_subcommand("bench", "Decision-time measurement");
  add_common(bench, bench_opt);
  bool series = false;
  std::size_t bench_frames = 200;
  bench->add_flag("--series", series, "Scaling series over N = 2..6");
  bench->add_option("--bench-frames", bench_frames, "Timed frames per measurement");

  auto* solve = app.add_subcommand("solve", "Bottleneck assignment of a delay grid file");
  std::string grid;
  bool binary = false;
  solve->add_option("grid", grid, "Grid file: one row per line, 'inf' marks forbidden cells")->required();
  solve->add_flag("--binary", binary, "Binary threshold search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*train) return run_train(train_opt);
    if (*eval) return run_eval(eval_opt, checkpoint);
    if (*compare) return run_compare(compare_opt, algorithms, warmup);
    if (*oracle) return run_oracle(oracle_opt);
    if (*bench) return run_bench(bench_opt, series, bench_frames);
    if (*solve) return run_solve(grid, binary);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kConfig;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
