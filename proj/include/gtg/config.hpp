#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtg/dataset.hpp"
#include "gtg/denoiser.hpp"
#include "gtg/diffusion.hpp"
#include "gtg/trajectory.hpp"

namespace gtg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TargetMode { known, gamma_max };
enum class GuidanceMode { cfg, inpaint_y };

// Declarative description of one experiment: dataset source, trajectory
// construction, both models, sampling and selection. Parsed from a flat
// `key = value` file; unknown keys are errors.
struct ExperimentConfig {
  int version = 1;

  std::string task = "branin";  // branin | sphere | file
  int task_dim = 2;             // sphere only
  std::string dataset_path;     // file task
  FileFormat dataset_format = FileFormat::json;
  std::optional<SpaceKind> dataset_space;  // overrides the file's space kind

  int gen_n_samples = 5000;
  double gen_trim = 0.10;

  TrajectoryConfig construction;
  bool neighbor_precompute = true;

  int diffusion_T = 200;
  ScheduleKind schedule = ScheduleKind::cosine;
  double beta_start = 1e-4, beta_end = 0.02;
  double omega = 1.2;
  double denoised_clip = 1.0;  // 0 disables the sampler's implied-x0 clamp

  int denoiser_hidden = 256;
  int denoiser_blocks = 4;
  int denoiser_time_embed_dim = 64;
  TrainConfig denoiser_train{.batch_size = 128,
                             .learning_rate = 1e-4,
                             .train_steps = 50000,
                             .dropout_p = 0.25,
                             .seed = 0,
                             .ema_decay = 0.0};

  int proxy_hidden = 1024;
  int proxy_layers = 2;
  double proxy_rank_k = 0.01;
  TrainConfig proxy_train{.batch_size = 128,
                          .learning_rate = 1e-3,
                          .train_steps = 5000,
                          .dropout_p = 0.0,
                          .seed = 0,
                          .ema_decay = 0.0};

  int n_sample_trajectories = 4;
  int context_length = 32;
  double alpha = 0.8;
  GuidanceMode guidance_mode = GuidanceMode::cfg;  // inpaint_y pins the score
                                                   // channel to y* instead
  TargetMode target_mode = TargetMode::known;
  std::optional<double> y_star_raw;  // raw optimum for known mode; task oracles provide a default
  double gamma = 1.0;

  int q_budget = 128;

  std::vector<std::uint64_t> seeds = {0};
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

// Throws ConfigError on invariant violations (C < H, Q within the harvested
// candidate budget, valid task/modes, positive sizes).
void validate(const ExperimentConfig& cfg);

// Canonical JSON rendering (fixed key order) and its FNV-1a hash; the hash is
// stable for identical configs.
nlohmann::ordered_json config_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace gtg
