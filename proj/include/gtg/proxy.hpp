#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gtg/dataset.hpp"
#include "gtg/denoiser.hpp"  // TrainConfig
#include "gtg/nn.hpp"
#include "gtg/tasks.hpp"

namespace gtg {

// Per-example weights w_i ~ 1/(k*N + rank_i); dense ranks from best (0) with
// ties sharing the better rank; rescaled so they sum to N.
struct RankWeights {
  Eigen::VectorXd w;
  double k = 0.01;
};

RankWeights rank_weights(const Eigen::VectorXd& scores, double k);

struct ProxyArch {
  int input_dim = 0;
  int hidden = 1024;
  int layers = 2;  // hidden layers

  bool operator==(const ProxyArch&) const = default;
};

// Feed-forward regressor: scaled design ([-1,1]^d) -> predicted normalized
// score. ReLU activations, plain linear head.
class ProxyModel {
 public:
  ProxyModel(const ProxyArch& arch, std::uint64_t init_seed);

  Eigen::VectorXd predict(const Eigen::MatrixXd& x_scaled) const;  // columns = batch
  double predict_one(const Eigen::VectorXd& x_scaled) const;

  // d(prediction)/d(input) at one point; used by the gradient-ascent
  // reference optimizer.
  Eigen::VectorXd input_gradient(const Eigen::VectorXd& x_scaled) const;

  const ProxyArch& arch() const { return arch_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  struct Workspace {
    Eigen::MatrixXd x;
    std::vector<Eigen::MatrixXd> z, h;
  };
  Eigen::VectorXd forward_cached(const Eigen::MatrixXd& x, Workspace& ws) const;
  // dL/d(pred) per column -> parameter grads (accumulated); returns d/d(input).
  Eigen::MatrixXd backward(const Workspace& ws, const Eigen::VectorXd& dpred);

 private:
  ProxyArch arch_;
  nn::ParamStore params_;
  std::vector<int> w_, b_;
  int w_out_, b_out_;
};

struct ProxyValidation {
  double rmse = 0.0;
  double spearman = 0.0;
  int n_train = 0, n_val = 0;
  std::uint64_t split_seed = 0;
};

// Weighted-MSE fit of targets on inputs; weights renormalized per batch.
// Loss curve (one entry per step) returned via `curve` when non-null.
ProxyModel fit_mlp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& weights, const ProxyArch& arch, const TrainConfig& cfg,
                   std::vector<double>* curve = nullptr);

// Rank-weighted regression of normalized scores on scaled designs with a
// 90/10 train/validation split (split stream derived from cfg.seed).
ProxyModel train_proxy(const OfflineDataset& ds, const TrainConfig& cfg,
                       const RankWeights& weights, const ProxyArch& arch,
                       ProxyValidation* validation = nullptr,
                       std::vector<double>* curve = nullptr);

// The Q candidates with the highest proxy predictions (ties broken by
// insertion order), predictions recorded alongside. Q >= 1.
CandidateSet filter_top_q(const CandidateSet& cands, const ProxyModel& proxy,
                          const OfflineDataset& ds, int Q);

// Naive gradient-ascent-on-proxy reference: ascend predictions in scaled
// design space from the given start columns.
Eigen::MatrixXd gradient_ascent(const ProxyModel& proxy, Eigen::MatrixXd starts_scaled, int steps,
                                double step_size);

}  // namespace gtg
