#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gtg/config.hpp"
#include "gtg/tasks.hpp"

namespace gtg {

// Normalized per-step conditioning optimum: known mode maps the raw optimum
// through the dataset's score normalization (values above 1 extrapolate past
// the dataset); gamma_max mode returns gamma * 1.0.
double estimate_target(const OfflineDataset& ds, TargetMode mode, double gamma,
                       std::optional<double> known_raw);

struct RunRecord {
  std::uint64_t seed = 0;
  std::string config_hash;
  EvalReport report;
  std::map<std::string, double> stage_seconds;
};

struct Aggregate {
  double mean_best_raw = 0.0, std_best_raw = 0.0;
  double mean_best_normalized = 0.0, std_best_normalized = 0.0;
  int n_seeds = 0;
};

struct RunResult {
  std::vector<RunRecord> records;
  std::vector<std::pair<std::uint64_t, std::string>> failed_seeds;  // (seed, error)
  Aggregate aggregate;
};

// Stage functions. Each consumes only the serialized artifacts of the
// previous stage inside `seed_dir`, so a run can resume from any checkpoint.
void stage_dataset(const ExperimentConfig& cfg, std::uint64_t seed,
                   const std::filesystem::path& seed_dir);
void stage_trajectories(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::filesystem::path& seed_dir);
void stage_train(const ExperimentConfig& cfg, std::uint64_t seed,
                 const std::filesystem::path& seed_dir);
// alpha_override lets ablations re-sample from trained checkpoints.
void stage_sample(const ExperimentConfig& cfg, std::uint64_t seed,
                  const std::filesystem::path& seed_dir,
                  std::optional<double> alpha_override = std::nullopt);
void stage_select(const ExperimentConfig& cfg, const std::filesystem::path& seed_dir);
EvalReport stage_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& seed_dir);

// The oracle behind cfg.task; throws ConfigError for task=file.
Oracle task_oracle(const ExperimentConfig& cfg);

// All stages for every seed under out_dir/seed_<s>/, then aggregation.
// A failing seed is recorded and skipped; throws only if every seed fails.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// One fully processed seed (all stages); returns its evaluation report.
RunRecord run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                   const std::filesystem::path& seed_dir);

struct AblateRow {
  double value = 0.0;
  double mean = 0.0, stddev = 0.0;
};

// Re-runs the experiment once per value of the given axis
// (H|C|alpha|K|epsilon|Q), all else fixed; writes ablate.csv under out_dir.
std::vector<AblateRow> ablate(const ExperimentConfig& cfg, const std::string& axis,
                              const std::vector<double>& values,
                              const std::filesystem::path& out_dir);

// Writes report.json (deterministic) and timings.csv (wall clock) for a set
// of processed seeds.
void write_aggregate_report(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                            const RunResult& result);

// candidates.json helpers (schema documented in the README).
void save_candidates(const CandidateSet& cands, std::uint64_t seed,
                     const std::filesystem::path& path);
CandidateSet load_candidates(const std::filesystem::path& path, std::uint64_t* seed_out = nullptr);

// Plot-data emission: score histograms per seed, score-shift summary, and for
// 2-d tasks trajectory polylines plus a 101x101 oracle contour grid.
void emit_stats(const ExperimentConfig& cfg, const std::filesystem::path& run_dir);

}  // namespace gtg
