#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gtg/rng.hpp"

namespace gtg {

enum class SpaceKind { continuous, discrete };
enum class FileFormat { csv, json };

// Offline dataset D = {(x_i, y_i)}. Designs are stored column-wise in raw
// units; scores are raw. Normalization state is fixed at construction and the
// object is immutable afterwards, so it is safe to share across threads.
struct OfflineDataset {
  Eigen::MatrixXd designs;  // d x N, one design per column
  Eigen::VectorXd scores;   // N
  Eigen::VectorXd x_lo, x_hi;  // per-dimension data bounds
  double y_min = 0.0;
  double y_max = 0.0;
  SpaceKind space = SpaceKind::continuous;

  int size() const { return static_cast<int>(designs.cols()); }
  int dim() const { return static_cast<int>(designs.rows()); }

  // y-tilde = (y - y_min) / (y_max - y_min). Values outside [y_min, y_max]
  // are allowed and map outside [0, 1].
  double normalize_score(double y) const { return (y - y_min) / (y_max - y_min); }
  double denormalize_score(double yn) const { return y_min + yn * (y_max - y_min); }

  // Min-max scale a design to [-1, 1] per dimension (constant dims map to 0).
  Eigen::VectorXd scale_design(const Eigen::VectorXd& x) const;
  Eigen::VectorXd unscale_design(const Eigen::VectorXd& u) const;
};

// Validates invariants (N >= 1, consistent d, y_min < y_max) and computes
// normalization stats. Throws std::invalid_argument on violation.
OfflineDataset make_dataset(Eigen::MatrixXd designs, Eigen::VectorXd scores,
                            SpaceKind space = SpaceKind::continuous);

// CSV: header "x0,...,x{d-1},y", one row per point.
// JSON: {"designs": [[...]], "scores": [...], "space": "continuous"|"discrete"}.
OfflineDataset load_dataset(const std::filesystem::path& path, FileFormat format);
void save_dataset(const OfflineDataset& ds, const std::filesystem::path& path, FileFormat format);

// Pairwise design distances: Euclidean for continuous spaces, Hamming for
// discrete ones. By default the full N x N matrix and per-row orderings are
// precomputed (memory: N^2 doubles + N^2 int32, i.e. ~12*N^2 bytes — fine up
// to a few tens of thousands of points). The on-the-fly mode trades query
// speed for O(N) memory and recomputes one row per query.
class NeighborIndex {
 public:
  static NeighborIndex build(const OfflineDataset& ds, bool precompute = true);

  double distance(const OfflineDataset& ds, int i, int j) const;
  bool precomputed() const { return precompute_; }
  double build_seconds() const { return build_seconds_; }
  int size() const { return n_; }

  // Indices of all points != center ordered by (distance, index) ascending.
  std::vector<int> ordered_neighbors(const OfflineDataset& ds, int center) const;

  // The K nearest neighbors of `center` (excluding center itself) whose raw
  // score is strictly greater than `threshold`, in non-decreasing distance
  // order (ties toward the smaller index). Fewer than K returned iff fewer
  // qualify; an empty result is legal.
  std::vector<int> knn_above_threshold(const OfflineDataset& ds, int center, int K,
                                       double threshold) const;

 private:
  int n_ = 0;
  bool precompute_ = true;
  double build_seconds_ = 0.0;
  Eigen::MatrixXd distances_;                // n x n, empty in on-the-fly mode
  std::vector<std::vector<int>> order_;      // per-row sorted neighbor indices
};

double design_distance(const OfflineDataset& ds, int i, int j);

// Raw score value at the nearest-rank p-th percentile of the dataset.
double percentile_score(const OfflineDataset& ds, double p);

// Uniform draw among points whose score is <= the p-th percentile score.
// Returns the dataset row index. p in (0, 100].
int sample_low_percentile(const OfflineDataset& ds, double p, Rng& rng);

}  // namespace gtg
