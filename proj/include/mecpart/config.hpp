#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mecpart/otpps.hpp"
#include "mecpart/system_model.hpp"

namespace mecpart {

struct RunConfig {
  std::size_t frames = 10000;            // I_max
  std::size_t warmup_frames = 0;         // compare: learning frames before recording
  std::size_t exhaustive_every = 10;     // co-evaluate the brute-force optimum every k frames (0 = never)
  std::size_t exhaustive_cap = 10;       // refuse brute force above this many results in total
  std::size_t checkpoint_every = 1000;   // 0 = final checkpoint only
  bool record_timing = true;
  std::vector<std::string> algorithms{"OTPPS", "NOSP", "MINGRA", "KMEANS", "EXHAUSTIVE",
                                      "GREEDY", "RANDOM", "KM", "LOCAL"};
  std::string output_dir = "runs/default";
};

/// Everything one experiment needs. Units are SI throughout.
struct ExperimentConfig {
  EnvironmentConfig environment;
  LearnerConfig learner;
  RunConfig run;
  std::uint64_t seed = 1;
  // Feature scaling; a nonpositive reference gain means "mean gain at 10 m".
  double reference_gain = 0.0;
  double reference_hz = 2.0e9;

  FeatureScaling scaling() const;
  void validate() const;
};

/// Table-driven defaults (N = 2, M = 3, N_res in {3, 4}).
ExperimentConfig default_config();

/// Missing keys keep their defaults; unknown keys are rejected. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Independent stream seeds derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace mecpart
