#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gtg/diffusion.hpp"
#include "gtg/nn.hpp"

namespace gtg {

// Residual multilayer network over the flattened H x (d+1) trajectory array.
// Timestep enters through a sinusoidal embedding + 2-layer MLP; the condition
// scalar through its own 2-layer MLP (or a learned null-token embedding when
// dropped); both are added and injected into every block.
struct DenoiserArch {
  int input_dim = 0;       // H * (d + 1)
  int hidden = 256;
  int blocks = 4;
  int time_embed_dim = 64; // must be even
  double cond_scale = 1.0; // condition values are divided by this before embedding

  bool operator==(const DenoiserArch&) const = default;
};

enum class InitMode {
  zero_output_head,  // default: trunk random, output layer zeroed
  full_random,       // everything random (gradient-check probes)
};

struct TrainConfig {
  int batch_size = 128;
  double learning_rate = 1e-4;
  std::int64_t train_steps = 10000;
  double dropout_p = 0.25;
  std::uint64_t seed = 0;
  double ema_decay = 0.0;  // 0 disables EMA
};

struct TrainResult {
  std::vector<double> loss_curve;  // one entry per step
  double first_decile_mean = 0.0;  // mean loss over the first 10% of steps
  double last_decile_mean = 0.0;   // mean loss over the last 10% of steps
};

class DenoiserModel : public EpsilonModel {
 public:
  DenoiserModel(const DenoiserArch& arch, std::uint64_t init_seed,
                InitMode mode = InitMode::zero_output_head);

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, std::span<const Cond> conds,
                          std::span<const int> ts) const override;

  struct Workspace;  // cached activations for one forward pass

  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x, std::span<const Cond> conds,
                                 std::span<const int> ts, Workspace& ws) const;

  // Accumulates parameter gradients for dL/d(output) into params().grad.
  void backward(const Workspace& ws, const Eigen::MatrixXd& dout);

  const DenoiserArch& arch() const { return arch_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  struct Workspace {
    Eigen::MatrixXd x, sin_emb, cond_raw;
    std::vector<bool> is_null;
    Eigen::MatrixXd zt1, ht1, zc1, hc1;
    Eigen::MatrixXd z0;
    std::vector<Eigen::MatrixXd> h;  // h[0] after input layer, h[i+1] after block i
    std::vector<Eigen::MatrixXd> z, u;  // per-block pre-activation and activation
  };

 private:
  DenoiserArch arch_;
  nn::ParamStore params_;
  // tensor ids
  int w_in_, b_in_, w_t1_, b_t1_, w_t2_, b_t2_;
  int w_c1_, b_c1_, w_c2_, b_c2_, null_token_;
  std::vector<int> w1_, b1_, w2_, b2_;
  int w_out_, b_out_;

  Eigen::MatrixXd sinusoidal(std::span<const int> ts) const;
};

// Draws one realized CFG training batch from (tau0s, cond_values), runs the
// model, and leaves exact parameter gradients in model.params(). Returns the
// loss (mean squared noise-prediction error per batch element).
double cfg_loss(DenoiserModel& model, const Eigen::MatrixXd& tau0s,
                const Eigen::VectorXd& cond_values, const NoiseSchedule& sched, double dropout_p,
                Rng& rng);

// Same, but on an already-materialized batch (used by gradient checks, where
// the loss must be a deterministic function of the parameters).
double cfg_loss_on_batch(DenoiserModel& model, const TrainingBatch& batch);

// Adam on cfg_loss over uniformly drawn mini-batches. Columns of tau0s are
// training trajectories in model units. Throws on non-finite loss, naming the
// offending step. With ema_decay > 0 the returned model carries the EMA
// parameters.
TrainResult train(DenoiserModel& model, const Eigen::MatrixXd& tau0s,
                  const Eigen::VectorXd& cond_values, const NoiseSchedule& sched,
                  const TrainConfig& cfg);

}  // namespace gtg
