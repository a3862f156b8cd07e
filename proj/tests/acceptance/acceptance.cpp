// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "mecpart/assignment.hpp"
#include "mecpart/error.hpp"
#include "mecpart/experiment.hpp"
#include "mecpart/metrics.hpp"
#include "mecpart/quantizer.hpp"

using namespace mecpart;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1 ---------------------------------------------------------------------

std::optional<ExtendedDelay> brute_bottleneck(const DelayMatrix& m) {
  std::optional<ExtendedDelay> best;
  std::vector<bool> used(m.cols(), false);
  std::function<void(std::size_t, ExtendedDelay)> rec = [&](std::size_t r, ExtendedDelay worst) {
    if (best && !(worst < *best)) return;  // cannot improve
    if (r == m.rows()) {
      best = worst;
      return;
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (used[c] || m.at(r, c).is_forbidden()) continue;
      used[c] = true;
      rec(r + 1, worst < m.at(r, c) ? m.at(r, c) : worst);
      used[c] = false;
    }
  };
  rec(0, ExtendedDelay::from_ratio(0.0));
  return best;
}

DelayMatrix random_raw_grid(Rng& rng) {
  std::uniform_int_distribution<std::size_t> rows_d(1, 7);
  const std::size_t rows = rows_d(rng);
  const std::size_t cols = std::uniform_int_distribution<std::size_t>(rows, 9)(rng);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  // Coarse values make ties common.
  std::uniform_int_distribution<int> coarse(1, 8);
  std::bernoulli_distribution forbid(0.25), use_coarse(0.5);
  const bool tied = use_coarse(rng);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = forbid(rng) ? std::numeric_limits<double>::infinity() : (tied ? coarse(rng) / 4.0 : u(rng));
  return DelayMatrix::from_ratios(rows, cols, v);
}

// System matrices with the device-restricted pattern (other TDs' local and
// edge-server columns forbidden).
DelayMatrix random_system_grid(Rng& rng) {
  while (true) {
    EnvironmentConfig ec;
    ec.num_tds = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    const std::size_t max_m = 9 - 2 * ec.num_tds;
    ec.num_ads = std::uniform_int_distribution<std::size_t>(0, std::min<std::size_t>(max_m, 4))(rng);
    ec.tasks.min_results = 1;
    ec.tasks.max_results = 4;
    ec.tasks.deadline_s = std::uniform_real_distribution<double>(4.0, 9.0)(rng);
    ec.seed = rng();
    Environment env(ec);
    PartitionAction a;
    for (const auto& t : env.tasks()) {
      std::vector<int> raw(t.num_results());
      for (auto& l : raw) l = std::uniform_int_distribution<int>(1, static_cast<int>(t.num_results()))(rng);
      a.labels.push_back(canonicalize(raw));
    }
    if (a.total_partitions() > 7 || a.total_partitions() > 2 * ec.num_tds + ec.num_ads) continue;
    return build_delay_matrix(env.tasks(), a, env.advance_frame(), env.radio());
  }
}

Verdict criterion1() {
  Rng rng(2024);
  std::size_t agree = 0, infeasible = 0, system = 0;
  const std::size_t total = 500;
  std::string first_bad;
  for (std::size_t i = 0; i < total; ++i) {
    const bool sys = i % 2 == 1;
    const auto m = sys ? random_system_grid(rng) : random_raw_grid(rng);
    system += sys;
    const auto expected = brute_bottleneck(m);
    bool ok;
    if (!expected) {
      ++infeasible;
      try {
        fdmts(m);
        ok = false;
      } catch (const InfeasibleError&) {
        ok = true;
      }
    } else {
      const auto got = fdmts(m).bottleneck;
      ok = got == *expected && got.ratio == expected->ratio;
      if (!ok && first_bad.empty()) first_bad = " first mismatch: " + to_string(got) + " vs " + to_string(*expected);
    }
    agree += ok;
  }
  return {agree == total, fmt("%zu/%zu instances agree with enumeration (%zu with device pattern, %zu infeasible)%s",
                              agree, total, system, infeasible, first_bad.c_str())};
}

// --- 2 ---------------------------------------------------------------------

Verdict criterion2() {
  const RelaxedAction input{{{0.2, 0.4, 0.7, 0.9}, {0.3, 0.7, 0.9}}};
  const auto out = stq_quantize(input, 4);
  const std::vector<std::vector<int>> expected{
      {1, 2, 3, 4, 1, 2, 2}, {1, 2, 3, 4, 1, 2, 3}, {1, 2, 3, 4, 1, 2, 3}, {1, 1, 2, 2, 1, 2, 2}};
  bool ok = out.size() == 4;
  for (std::size_t q = 0; ok && q < 4; ++q) ok = out[q].flat() == expected[q];
  const std::vector<std::size_t> counts{4, 3};
  const auto kept = filter_candidates(out, counts, 3);
  const auto norm = normalize_action(out[0]).flat();
  const std::vector<double> want{1.0 / 4, 2.0 / 4, 3.0 / 4, 1.0, 1.0 / 3, 2.0 / 3, 2.0 / 3};
  const bool norm_ok = norm == want;
  return {ok && kept.size() == 3 && norm_ok,
          fmt("four actions %s, Q' = %zu, normalization %s", ok ? "exact" : "differ", kept.size(),
              norm_ok ? "exact" : "differs")};
}

// --- 3 and 4 ---------------------------------------------------------------

struct RatioSeries {
  std::vector<std::uint64_t> t;
  std::vector<double> ratio;
};

RatioSeries training_ratios(ExperimentConfig cfg) {
  RatioSeries s;
  run_training(cfg, {[&](const FrameRecord& r) {
                       if (!r.exhaustive_mnd) return;
                       s.t.push_back(r.t);
                       s.ratio.push_back(r.mnd / *r.exhaustive_mnd);
                     },
                     {}});
  return s;
}

ExperimentConfig desk_config(std::uint64_t seed) {
  auto cfg = default_config();
  cfg.seed = seed;
  cfg.run.record_timing = false;
  cfg.run.checkpoint_every = 0;
  return cfg;
}

Verdict criterion3() {
  auto cfg = desk_config(1);
  cfg.run.frames = 3000;
  cfg.run.exhaustive_every = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = training_ratios(cfg);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.t.size(); ++i)
    if (s.t[i] > 2500) {
      sum += s.ratio[i];
      ++n;
    }
  const double mean = sum / static_cast<double>(n);
  return {mean <= 1.05, fmt("mean OTPPS/Exhaustive MND over frames 2501-3000 = %.5f (bound 1.05, %.0f s)", mean,
                            seconds_since(t0))};
}

struct ConvergenceRun {
  double late_change = 0.0;      // (max - min) / min of the moving average after frame 2000
  std::uint64_t converged = 0;   // frame from which the average stays within 5% of its final value
};

ConvergenceRun convergence_run(std::size_t num_tds, std::uint64_t seed, std::size_t frames) {
  auto cfg = desk_config(seed);
  cfg.environment.num_tds = num_tds;
  cfg.run.frames = frames;
  cfg.run.exhaustive_every = 10;
  cfg.run.exhaustive_cap = 4 * num_tds;
  const auto s = training_ratios(cfg);
  const auto ma = moving_average(s.t, s.ratio, 200);
  ConvergenceRun r;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < ma.size(); ++i)
    if (s.t[i] > 2000) {
      lo = std::min(lo, ma[i]);
      hi = std::max(hi, ma[i]);
    }
  r.late_change = (hi - lo) / lo;
  const auto idx = convergence_index(ma, 0.05);
  r.converged = idx < s.t.size() ? s.t[idx] : s.t.back();
  return r;
}

Verdict criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t frames = 4000;
  int passes = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto n2 = convergence_run(2, seed, frames);
    const auto n4 = convergence_run(4, seed, frames);
    const bool stable = n2.late_change < 0.05;
    const bool ordered = n2.converged < n4.converged;
    passes += stable && ordered;
    detail += fmt("seed %llu: N=2 late change %.4f, converged at %llu vs N=4 at %llu %s; ",
                  static_cast<unsigned long long>(seed), n2.late_change,
                  static_cast<unsigned long long>(n2.converged), static_cast<unsigned long long>(n4.converged),
                  stable && ordered ? "pass" : "fail");
  }
  detail += fmt("%d/3 seeds pass (%.0f s)", passes, seconds_since(t0));
  return {passes >= 2, detail};
}

// --- 5, 6, 7 ---------------------------------------------------------------

Verdict criterion5() {
  auto cfg = desk_config(5);
  cfg.environment.resources.ad_hz = {0.8e9, 1.0e9};
  cfg.run.warmup_frames = 3000;
  cfg.run.frames = 500;
  cfg.run.algorithms = {"OTPPS", "MINGRA"};
  const auto cmp = compare_algorithms(cfg);
  const double otpps = cmp.summary_of("OTPPS").mean_mnd;
  const double mingra = cmp.summary_of("MINGRA").mean_mnd;
  return {otpps <= 0.7 * mingra,
          fmt("mean MND OTPPS %.5f vs MINGRA+FDMTS %.5f, ratio %.4f (bound 0.70)", otpps, mingra, otpps / mingra)};
}

Verdict criterion6() {
  auto cfg = desk_config(6);
  cfg.run.frames = 1000;
  cfg.run.algorithms = {"OTPPS", "GREEDY", "RANDOM", "KM", "NOSP", "LOCAL"};
  const auto cmp = compare_algorithms(cfg);
  std::size_t greedy = 0, random = 0, km = 0, local = 0;
  for (const auto& f : cmp.frames) {
    const auto& a = f.algorithms;
    greedy += a.at("OTPPS").mnd > a.at("GREEDY").mnd;
    random += a.at("OTPPS").mnd > a.at("RANDOM").mnd;
    km += a.at("OTPPS").mnd > a.at("KM").mnd;
    local += a.at("NOSP").mnd > a.at("LOCAL").mnd;
  }
  const std::size_t violations = greedy + random + km + local;
  return {violations == 0 && cmp.frames.size() == 1000,
          fmt("%zu frames; violations vs Greedy %zu, Random %zu, Kuhn-Munkres %zu, Local %zu", cmp.frames.size(),
              greedy, random, km, local)};
}

Verdict criterion7() {
  // Bounds on every record of a mixed comparison run.
  auto cfg = desk_config(7);
  cfg.run.frames = 300;
  cfg.run.algorithms = {"OTPPS", "NOSP", "MINGRA", "KMEANS", "EXHAUSTIVE", "GREEDY", "RANDOM", "KM", "LOCAL"};
  const auto cmp = compare_algorithms(cfg);
  const double n = static_cast<double>(cfg.environment.num_tds);
  std::size_t checked = 0, out_of_bounds = 0;
  for (const auto& f : cmp.frames)
    for (const auto& [name, o] : f.algorithms) {
      if (!o.jain) continue;
      ++checked;
      out_of_bounds += *o.jain < 1.0 / n - 1e-12 || *o.jain > 1.0 + 1e-12;
    }
  const double equal = jain_index(std::vector<double>{0.37, 0.37, 0.37, 0.37, 0.37, 0.37});
  const bool equal_ok = std::abs(equal - 1.0) <= 1e-12;

  auto low = desk_config(8);
  low.environment.resources.ad_hz = {0.2e9, 0.4e9};
  low.run.warmup_frames = 1000;
  low.run.frames = 500;
  low.run.algorithms = {"OTPPS", "RANDOM"};
  const auto lc = compare_algorithms(low);
  const double f_otpps = lc.summary_of("OTPPS").mean_jain;
  const double f_random = lc.summary_of("RANDOM").mean_jain;
  return {out_of_bounds == 0 && checked > 0 && equal_ok && f_otpps >= f_random,
          fmt("%zu/%zu values in [1/N, 1]; equal delays F-1 = %.1e; low-resource mean F OTPPS %.6f vs Random %.6f",
              checked - out_of_bounds, checked, equal - 1.0, f_otpps, f_random)};
}

// --- 8, 9, 10 --------------------------------------------------------------

Verdict criterion8() {
  Rng rng(88);
  std::uniform_real_distribution<double> u(-1.0, 1.0), t(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    const Mlp net = Mlp::random({4, 8, 6}, rng);
    std::vector<TrainingSample> batch(1);
    batch[0].input.resize(4);
    batch[0].target.resize(6);
    for (auto& x : batch[0].input) x = u(rng);
    for (auto& y : batch[0].target) y = t(rng);
    worst = std::max(worst, max_gradient_error(net, batch, 1e-5));
  }
  return {worst <= 1e-4, fmt("max relative error %.3e over 20 points (bound 1e-4)", worst)};
}

Verdict criterion9() {
  auto cfg = desk_config(9);
  cfg.environment.num_tds = 6;
  cfg.environment.num_ads = 10;
  cfg.learner.num_quantized = 16;
  const auto s = measure_decision_time(cfg, 300, 20);
  return {s.mean_s < 0.1, fmt("N=6 M=10 Q=16: mean %.3f ms, p95 %.3f ms, max %.3f ms over %zu frames (%s kernels)",
                              s.mean_s * 1e3, s.p95_s * 1e3, s.max_s * 1e3, s.frames,
                              std::string(kernels::active_kernels().name).c_str())};
}

Verdict criterion10() {
  // Subadditivity: no partition exceeds the whole task, merging two
  // partitions never costs more than keeping them apart.
  Rng rng(1010);
  std::size_t sub_violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    TaskRanges ranges;
    ranges.min_results = 1;
    ranges.max_results = 8;
    const auto task = random_tasks(1, ranges, rng)[0];
    std::vector<int> raw(task.num_results());
    for (auto& l : raw) l = std::uniform_int_distribution<int>(1, static_cast<int>(raw.size()))(rng);
    const auto labels = canonicalize(raw);
    const auto parts = derive_partitions(task, labels);
    for (const auto& p : parts)
      sub_violations += p.cycles > task.cycles * (1 + 1e-12) || p.data_bits > task.data_bits * (1 + 1e-12);
    if (parts.size() >= 2) {
      std::vector<int> merged = labels;
      for (auto& l : merged)
        if (l == 2) l = 1;
      const auto mp = derive_partitions(task, canonicalize(merged));
      sub_violations += mp[0].cycles > (parts[0].cycles + parts[1].cycles) * (1 + 1e-12);
      sub_violations += mp[0].data_bits > (parts[0].data_bits + parts[1].data_bits) * (1 + 1e-12);
    }
  }

  // Every action above 2N + M partitions is rejected.
  std::size_t over = 0, accepted_over = 0;
  for (std::size_t n_tds = 1; n_tds <= 3; ++n_tds)
    for (std::size_t n_ads = 0; n_ads <= 2; ++n_ads) {
      std::vector<TaskSpec> tasks(n_tds);
      for (auto& t : tasks) t.result_weights.assign(4, 0.25);
      for_each_action(tasks, n_ads, false, [&](const PartitionAction& a) {
        if (a.total_partitions() > 2 * n_tds + n_ads) {
          ++over;
          accepted_over += validate_action(a, tasks, n_ads).ok();
        }
        return true;
      });
    }

  // Record streams are byte-identical without wall-clock fields.
  auto cfg = desk_config(10);
  cfg.run.frames = 300;
  cfg.run.exhaustive_every = 10;
  cfg.run.record_timing = true;
  auto stream = [&] {
    std::string out;
    run_training(cfg, {[&](const FrameRecord& r) { out += to_json(r, false).dump() + "\n"; }, {}});
    return out;
  };
  const auto a = stream();
  const auto b = stream();
  const bool same = a == b && !a.empty();

  return {sub_violations == 0 && over > 0 && accepted_over == 0 && same,
          fmt("subadditivity violations %zu over 10000 actions; %zu/%zu oversized actions rejected; record streams %s "
              "(%zu bytes)",
              sub_violations, over - accepted_over, over, same ? "identical" : "differ", a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> checks{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                     criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.contains(id)) continue;
    Verdict v;
    try {
      v = checks[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("criterion %d: %s  %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
