#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gtg/rng.hpp"

namespace gtg {

enum class ScheduleKind { cosine, linear };

// beta/alpha/alpha-bar tables for T steps; index 0 holds t = 1.
struct NoiseSchedule {
  int T = 0;
  ScheduleKind kind = ScheduleKind::cosine;
  double beta_start = 1e-4, beta_end = 0.02;  // linear endpoints, recorded
  Eigen::VectorXd beta, alpha, alpha_bar;

  double beta_at(int t) const { return beta(t - 1); }
  double alpha_at(int t) const { return alpha(t - 1); }
  double alpha_bar_at(int t) const { return alpha_bar(t - 1); }
};

// Cosine (default) or linear variance schedule. For linear, betas are evenly
// spaced over [beta_start, beta_end] (a single step uses beta_end).
NoiseSchedule make_schedule(int T, ScheduleKind kind, double beta_start = 1e-4,
                            double beta_end = 0.02);

// Conditioning token: either the scalar y(tau) or the learned null token.
struct Cond {
  bool is_null = true;
  double value = 0.0;
  static Cond null_token() { return {true, 0.0}; }
  static Cond of(double v) { return {false, v}; }
};

// Anything that predicts noise from (noised array, condition, timestep).
// Columns of x are independent batch elements.
class EpsilonModel {
 public:
  virtual ~EpsilonModel() = default;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x, std::span<const Cond> conds,
                                  std::span<const int> ts) const = 0;

  Eigen::MatrixXd predict_one(const Eigen::MatrixXd& x, Cond cond, int t) const;
};

// Closed-form marginal of the forward chain:
// sqrt(alpha_bar_t) * tau0 + sqrt(1 - alpha_bar_t) * noise.
Eigen::MatrixXd forward_noise(const NoiseSchedule& sched, const Eigen::MatrixXd& tau0, int t,
                              const Eigen::MatrixXd& noise);

// One realized training batch: per column, t ~ U(1,T), eps ~ N(0,I), and the
// condition replaced by the null token with probability dropout_p.
struct TrainingBatch {
  Eigen::MatrixXd x_t;   // noised inputs
  Eigen::MatrixXd eps;   // targets
  std::vector<Cond> conds;
  std::vector<int> ts;
};

// Draw order per column: t, dropout coin, then the noise entries top to
// bottom. Keeping this fixed makes training runs reproducible from the seed.
TrainingBatch make_training_batch(const Eigen::MatrixXd& tau0s, const Eigen::VectorXd& cond_values,
                                  const NoiseSchedule& sched, double dropout_p, Rng& rng);

// Mean over batch columns of the squared error norm |eps - model(x_t)|^2.
double cfg_loss_value(const EpsilonModel& model, const TrainingBatch& batch);

// Classifier-free-guidance combination, computed as
// (1 - omega) * eps_uncond + omega * eps_cond so omega = 0 and omega = 1
// reduce exactly to the unconditional / conditional predictions.
Eigen::MatrixXd guided_epsilon(const EpsilonModel& model, const Eigen::MatrixXd& x_t, int t,
                               double cond_value, double omega);

// Posterior mean step with fixed variance sigma_t^2 = beta_t:
// x_{t-1} = (x_t - beta_t / sqrt(1 - alpha_bar_t) * eps_hat) / sqrt(alpha_t)
//           + sqrt(beta_t) * injection.
Eigen::MatrixXd denoise_step(const NoiseSchedule& sched, const Eigen::MatrixXd& x_t, int t,
                             const Eigen::MatrixXd& eps_hat, const Eigen::MatrixXd& injection);

struct GuidanceConfig {
  double omega = 1.2;       // guidance scale
  double alpha_level = 0.8; // exploration level
  double y_star = 1.0;      // per-step optimum, normalized units
  int horizon = 64;         // H

  // Clamp for the implied clean sample during the reverse chain, in model
  // units (trajectories live in [-1, 1]). The late cosine steps scale
  // prediction error by 1/sqrt(alpha_t) (up to ~32 at t = T), so unclipped
  // chains diverge under an imperfect model. 0 disables.
  double denoised_clip = 1.0;

  // Conditioning target y*(tau) = alpha * (H * y*).
  double target_sum() const { return alpha_level * horizon * y_star; }
};

// Guided ancestral sampling with context inpainting over flattened
// trajectories of `rows` = H * row_width entries per column. After every
// denoise step the first ctx.rows() entries of each column are overwritten
// with the matching ctx column, so those positions of the final sample equal
// the context bit-for-bit. Chains are independent: chain i consumes only
// rngs[i], drawing the initial state and then one injection per step.
Eigen::MatrixXd sample_batch_with_context(const EpsilonModel& model, const NoiseSchedule& sched,
                                          const GuidanceConfig& guidance, const Eigen::MatrixXd& ctx,
                                          int rows, std::span<Rng> rngs);

// General masked variant: entries with mask[r] true are overwritten with
// values(r, chain) after every step. Context conditioning is the prefix
// special case; pinning the score channel to a target value instead of using
// classifier-free guidance is the other use.
Eigen::MatrixXd sample_batch_masked(const EpsilonModel& model, const NoiseSchedule& sched,
                                    const GuidanceConfig& guidance,
                                    const std::vector<bool>& mask, const Eigen::MatrixXd& values,
                                    int rows, std::span<Rng> rngs);

// Single-chain convenience wrapper; ctx has C * row_width entries, C < H.
Eigen::VectorXd sample_with_context(const EpsilonModel& model, const NoiseSchedule& sched,
                                    const GuidanceConfig& guidance, const Eigen::VectorXd& ctx,
                                    int rows, Rng& rng);

}  // namespace gtg
