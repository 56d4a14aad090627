#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gtg/dataset.hpp"

namespace gtg {

// Black-box function with evaluation bounds. `evaluate` is pure; callers are
// responsible for clamping or rejecting designs outside the box.
struct Oracle {
  std::string name;
  int dim = 0;
  Eigen::VectorXd lo, hi;
  std::optional<double> optimum_value;
  std::vector<Eigen::VectorXd> optima;
  std::function<double(const Eigen::VectorXd&)> evaluate;
};

// Negated Branin: three global maxima of value ~ -0.398 over
// [-5, 10] x [0, 15].
double branin(double x1, double x2);
Oracle branin_oracle();

// Negated squared norm over [-1, 1]^dim; maximum 0 at the origin.
Oracle sphere_oracle(int dim);

Oracle oracle_by_name(const std::string& name, int dim = 2);

// Uniform samples over the oracle box with the top `trim_top_fraction` of
// rows (by score) removed; floor(trim * n) rows are dropped.
OfflineDataset make_oracle_dataset(const Oracle& oracle, int n_samples, double trim_top_fraction,
                                   std::uint64_t seed);
OfflineDataset make_branin_dataset(int n_samples, double trim_top_fraction, std::uint64_t seed);

enum class CorruptMode { sparse, noisy };

// sparse: keep a uniform random floor(level * N) subset of rows, original
// order and values preserved bit-exactly. noisy: add level * N(0,1) to
// normalized scores, denormalize with the old stats, recompute stats.
OfflineDataset corrupt_dataset(const OfflineDataset& ds, CorruptMode mode, double level,
                               std::uint64_t seed);

// Generated designs with filtering metadata and (once evaluated) oracle
// scores. Parallel arrays; provenance points back at the sampled trajectory.
struct CandidateSet {
  Eigen::MatrixXd designs;       // d x n, raw units
  Eigen::VectorXd proxy_scores;  // normalized proxy predictions
  Eigen::VectorXd oracle_scores; // raw; empty until evaluated
  struct Provenance {
    int trajectory = -1;
    int step = -1;  // 1-based position within the trajectory
  };
  std::vector<Provenance> provenance;

  int size() const { return static_cast<int>(designs.cols()); }
  bool evaluated() const { return oracle_scores.size() == designs.cols(); }
};

struct EvalReport {
  double best_raw = 0.0;
  double best_normalized = 0.0;
  double p100 = 0.0, p80 = 0.0, p50 = 0.0;  // percentiles of normalized scores
  int clamped = 0;                           // designs clamped into the oracle box
  int n_candidates = 0;
};

// Scores every candidate once (clamping out-of-box designs with a warning
// count) and reports best raw/normalized plus percentile summary. Normalized
// scores use the dataset's y_min/y_max, so values above 1 beat the dataset.
EvalReport evaluate_candidates(CandidateSet& cands, const Oracle& oracle,
                               const OfflineDataset& ds);

// Mean pairwise distance (1/(n(n-1))) * sum over ordered pairs.
double diversity(const Eigen::MatrixXd& designs, SpaceKind metric);

}  // namespace gtg
