#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <Eigen/Core>

#include "gtg/dataset.hpp"

namespace gtg {

// H-step improvement path. Builder output points at dataset rows; generated
// trajectories carry source_row = -1 for synthesized steps.
struct Trajectory {
  Eigen::MatrixXd designs;      // d x H, raw units
  Eigen::VectorXd raw_scores;   // H
  Eigen::VectorXd norm_scores;  // H
  std::vector<int> source_rows;

  int length() const { return static_cast<int>(designs.cols()); }
  int dim() const { return static_cast<int>(designs.rows()); }
  // Sum of normalized scores, the trajectory's conditioning value.
  double condition_value() const { return norm_scores.sum(); }
};

struct TrajectoryConfig {
  double p = 20.0;       // starting percentile
  int H = 64;            // trajectory length
  int n_traj = 400;      // number of trajectories
  int K = 20;            // neighbors per step
  double epsilon = 0.05; // threshold slack in normalized-score units
};

struct TrajectoryDataset {
  TrajectoryConfig config;
  std::vector<Trajectory> trajectories;
  // Steps where no neighbor cleared the threshold and the search was widened
  // to the plain K nearest. Zero on most configs; recorded for diagnostics.
  std::int64_t fallback_steps = 0;

  int size() const { return static_cast<int>(trajectories.size()); }
};

// Locality-biased local search: start each trajectory at a bottom-p
// percentile point, then repeatedly pick uniformly among the K nearest
// neighbors whose raw score exceeds the running max minus epsilon (epsilon
// converted to raw units via the dataset score range). Trajectories use
// independent RNG streams derived from (seed, trajectory index), so results
// are reproducible regardless of construction order.
TrajectoryDataset build_trajectories(const OfflineDataset& ds, const NeighborIndex& idx,
                                     const TrajectoryConfig& cfg, std::uint64_t seed);

struct ScoreShift {
  double dataset_mean = 0.0, dataset_std = 0.0;
  double trajectory_mean = 0.0, trajectory_std = 0.0;
  Eigen::VectorXd dataset_deciles;    // 11 points: min, 10%, ..., 100%
  Eigen::VectorXd trajectory_deciles;
};

// Raw-score distribution of the trajectory dataset against the offline
// dataset it was built from.
ScoreShift score_shift_stats(const TrajectoryDataset& tds, const OfflineDataset& ds);

// --- model-unit representation ---------------------------------------------
// A trajectory enters the diffusion model as a flat vector of width
// H * (d + 1), step-major: [x~_1 (d dims), y~_1, x~_2, y~_2, ...] with designs
// min-max scaled to [-1, 1] and scores normalized to [0, 1].

int model_width(const OfflineDataset& ds);  // d + 1

Eigen::VectorXd flatten_to_model(const Trajectory& traj, const OfflineDataset& ds);

// One column per trajectory; rows = H * (d + 1).
Eigen::MatrixXd model_matrix(const TrajectoryDataset& tds, const OfflineDataset& ds);

// Conditioning values y(tau) for every trajectory, aligned with model_matrix.
Eigen::VectorXd condition_values(const TrajectoryDataset& tds);

// Inverse of flatten_to_model. source_rows are -1 (synthesized).
Trajectory trajectory_from_model(const Eigen::VectorXd& flat, const OfflineDataset& ds, int H);

void save_trajectories(const TrajectoryDataset& tds, const std::filesystem::path& path);
TrajectoryDataset load_trajectories(const std::filesystem::path& path);

nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

}  // namespace gtg
