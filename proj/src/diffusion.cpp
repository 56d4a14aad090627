#include "gtg/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gtg {

NoiseSchedule make_schedule(int T, ScheduleKind kind, double beta_start, double beta_end) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  NoiseSchedule s;
  s.T = T;
  s.kind = kind;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.beta.resize(T);
  s.alpha.resize(T);
  s.alpha_bar.resize(T);
  if (kind == ScheduleKind::linear) {
    for (int i = 0; i < T; ++i)
      s.beta(i) = T == 1 ? beta_end
                         : beta_start + (beta_end - beta_start) * i / static_cast<double>(T - 1);
  } else {
    // Squared-cosine alpha-bar with the usual 0.008 offset; betas derived
    // from consecutive ratios and clipped below 0.999.
    const double offset = 0.008;
    auto f = [&](double t) {
      const double v = std::cos((t / T + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
      return v * v;
    };
    const double f0 = f(0.0);
    double prev = 1.0;
    for (int i = 0; i < T; ++i) {
      const double ab = f(static_cast<double>(i + 1)) / f0;
      double beta = 1.0 - ab / prev;
      beta = std::min(beta, 0.999);
      s.beta(i) = beta;
      prev *= 1.0 - beta;
    }
  }
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    if (!(s.beta(i) > 0.0 && s.beta(i) < 1.0))
      throw std::invalid_argument("schedule: beta out of (0,1)");
    s.alpha(i) = 1.0 - s.beta(i);
    prod *= s.alpha(i);
    s.alpha_bar(i) = prod;
  }
  return s;
}

Eigen::MatrixXd EpsilonModel::predict_one(const Eigen::MatrixXd& x, Cond cond, int t) const {
  const Eigen::MatrixXd flat = x.reshaped(x.size(), 1);
  const Cond conds[1] = {cond};
  const int ts[1] = {t};
  return predict(flat, conds, ts).reshaped(x.rows(), x.cols());
}

Eigen::MatrixXd forward_noise(const NoiseSchedule& sched, const Eigen::MatrixXd& tau0, int t,
                              const Eigen::MatrixXd& noise) {
  if (t < 1 || t > sched.T) throw std::invalid_argument("forward_noise: t out of [1,T]");
  if (tau0.rows() != noise.rows() || tau0.cols() != noise.cols())
    throw std::invalid_argument("forward_noise: shape mismatch");
  const double ab = sched.alpha_bar_at(t);
  return std::sqrt(ab) * tau0 + std::sqrt(1.0 - ab) * noise;
}

TrainingBatch make_training_batch(const Eigen::MatrixXd& tau0s, const Eigen::VectorXd& cond_values,
                                  const NoiseSchedule& sched, double dropout_p, Rng& rng) {
  if (tau0s.cols() == 0) throw std::invalid_argument("training batch: empty");
  if (tau0s.cols() != cond_values.size())
    throw std::invalid_argument("training batch: condition count mismatch");
  if (!(dropout_p >= 0.0 && dropout_p <= 1.0))
    throw std::invalid_argument("training batch: dropout_p out of [0,1]");
  const auto rows = tau0s.rows();
  const auto cols = tau0s.cols();
  TrainingBatch b;
  b.x_t.resize(rows, cols);
  b.eps.resize(rows, cols);
  b.conds.resize(static_cast<std::size_t>(cols));
  b.ts.resize(static_cast<std::size_t>(cols));
  for (Eigen::Index c = 0; c < cols; ++c) {
    const int t = static_cast<int>(rng.uniform_int(1, sched.T));
    const bool drop = rng.bernoulli(dropout_p);
    for (Eigen::Index r = 0; r < rows; ++r) b.eps(r, c) = rng.normal();
    b.ts[static_cast<std::size_t>(c)] = t;
    b.conds[static_cast<std::size_t>(c)] = drop ? Cond::null_token() : Cond::of(cond_values(c));
    const double ab = sched.alpha_bar_at(t);
    b.x_t.col(c) = std::sqrt(ab) * tau0s.col(c) + std::sqrt(1.0 - ab) * b.eps.col(c);
  }
  return b;
}

double cfg_loss_value(const EpsilonModel& model, const TrainingBatch& batch) {
  const Eigen::MatrixXd pred = model.predict(batch.x_t, batch.conds, batch.ts);
  return (batch.eps - pred).colwise().squaredNorm().mean();
}

Eigen::MatrixXd guided_epsilon(const EpsilonModel& model, const Eigen::MatrixXd& x_t, int t,
                               double cond_value, double omega) {
  std::vector<Cond> uncond(static_cast<std::size_t>(x_t.cols()), Cond::null_token());
  std::vector<Cond> cond(static_cast<std::size_t>(x_t.cols()), Cond::of(cond_value));
  std::vector<int> ts(static_cast<std::size_t>(x_t.cols()), t);
  const Eigen::MatrixXd eps_u = model.predict(x_t, uncond, ts);
  const Eigen::MatrixXd eps_c = model.predict(x_t, cond, ts);
  return (1.0 - omega) * eps_u + omega * eps_c;
}

Eigen::MatrixXd denoise_step(const NoiseSchedule& sched, const Eigen::MatrixXd& x_t, int t,
                             const Eigen::MatrixXd& eps_hat, const Eigen::MatrixXd& injection) {
  if (t < 1 || t > sched.T) throw std::invalid_argument("denoise_step: t out of [1,T]");
  if (x_t.rows() != eps_hat.rows() || x_t.cols() != eps_hat.cols() ||
      x_t.rows() != injection.rows() || x_t.cols() != injection.cols())
    throw std::invalid_argument("denoise_step: shape mismatch");
  const double beta = sched.beta_at(t);
  const double ab = sched.alpha_bar_at(t);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha_at(t));
  return inv_sqrt_alpha * (x_t - (beta / std::sqrt(1.0 - ab)) * eps_hat) +
         std::sqrt(beta) * injection;
}

Eigen::MatrixXd sample_batch_masked(const EpsilonModel& model, const NoiseSchedule& sched,
                                    const GuidanceConfig& guidance, const std::vector<bool>& mask,
                                    const Eigen::MatrixXd& values, int rows, std::span<Rng> rngs) {
  const auto n = static_cast<Eigen::Index>(rngs.size());
  if (n < 1) throw std::invalid_argument("sample: need at least one chain");
  if (static_cast<int>(mask.size()) != rows) throw std::invalid_argument("sample: mask size mismatch");
  const bool any_masked = std::find(mask.begin(), mask.end(), true) != mask.end();
  if (any_masked && (values.rows() != rows || values.cols() != n))
    throw std::invalid_argument("sample: mask value shape mismatch");
  if (!(guidance.omega >= 0.0)) throw std::invalid_argument("sample: omega must be >= 0");

  Eigen::MatrixXd x(rows, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (int r = 0; r < rows; ++r) x(r, c) = rngs[static_cast<std::size_t>(c)].normal();

  auto overwrite = [&] {
    if (!any_masked) return;
    for (int r = 0; r < rows; ++r)
      if (mask[static_cast<std::size_t>(r)]) x.row(r) = values.row(r);
  };

  Eigen::MatrixXd injection(rows, n);
  const double target = guidance.target_sum();
  for (int t = sched.T; t >= 1; --t) {
    Eigen::MatrixXd eps_hat = guided_epsilon(model, x, t, target, guidance.omega);
    if (guidance.denoised_clip > 0.0) {
      // Clamp the implied clean sample and fold the clamp back into the noise
      // prediction, leaving the posterior-mean step itself untouched.
      const double c = guidance.denoised_clip;
      const double ab = sched.alpha_bar_at(t);
      const Eigen::MatrixXd x0 =
          ((x - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab)).cwiseMax(-c).cwiseMin(c);
      eps_hat = (x - std::sqrt(ab) * x0) / std::sqrt(1.0 - ab);
    }
    if (t == 1) {
      injection.setZero();
    } else {
      for (Eigen::Index c = 0; c < n; ++c)
        for (int r = 0; r < rows; ++r) injection(r, c) = rngs[static_cast<std::size_t>(c)].normal();
    }
    x = denoise_step(sched, x, t, eps_hat, injection);
    overwrite();
  }
  return x;
}

Eigen::MatrixXd sample_batch_with_context(const EpsilonModel& model, const NoiseSchedule& sched,
                                          const GuidanceConfig& guidance, const Eigen::MatrixXd& ctx,
                                          int rows, std::span<Rng> rngs) {
  const auto ctx_rows = ctx.rows();
  if (ctx_rows >= rows) throw std::invalid_argument("sample: context must be shorter than the trajectory");
  if (ctx_rows > 0 && ctx.cols() != static_cast<Eigen::Index>(rngs.size()))
    throw std::invalid_argument("sample: context column count mismatch");
  std::vector<bool> mask(static_cast<std::size_t>(rows), false);
  Eigen::MatrixXd values;
  if (ctx_rows > 0) {
    for (Eigen::Index r = 0; r < ctx_rows; ++r) mask[static_cast<std::size_t>(r)] = true;
    values = Eigen::MatrixXd::Zero(rows, ctx.cols());
    values.topRows(ctx_rows) = ctx;
  }
  return sample_batch_masked(model, sched, guidance, mask, values, rows, rngs);
}

Eigen::VectorXd sample_with_context(const EpsilonModel& model, const NoiseSchedule& sched,
                                    const GuidanceConfig& guidance, const Eigen::VectorXd& ctx,
                                    int rows, Rng& rng) {
  Rng* one = &rng;
  return sample_batch_with_context(model, sched, guidance, ctx, rows, std::span<Rng>(one, 1));
}

}  // namespace gtg
