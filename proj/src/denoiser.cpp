#include "gtg/denoiser.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace gtg {

DenoiserModel::DenoiserModel(const DenoiserArch& arch, std::uint64_t init_seed, InitMode mode)
    : arch_(arch) {
  if (arch.input_dim < 1 || arch.hidden < 1 || arch.blocks < 0)
    throw std::invalid_argument("denoiser: bad architecture");
  if (arch.time_embed_dim < 2 || arch.time_embed_dim % 2 != 0)
    throw std::invalid_argument("denoiser: time_embed_dim must be even and >= 2");
  if (!(arch.cond_scale > 0.0)) throw std::invalid_argument("denoiser: cond_scale must be > 0");

  const int h = arch.hidden;
  w_in_ = params_.add("w_in", h, arch.input_dim);
  b_in_ = params_.add("b_in", h, 1);
  w_t1_ = params_.add("w_t1", h, arch.time_embed_dim);
  b_t1_ = params_.add("b_t1", h, 1);
  w_t2_ = params_.add("w_t2", h, h);
  b_t2_ = params_.add("b_t2", h, 1);
  w_c1_ = params_.add("w_c1", h, 1);
  b_c1_ = params_.add("b_c1", h, 1);
  w_c2_ = params_.add("w_c2", h, h);
  b_c2_ = params_.add("b_c2", h, 1);
  null_token_ = params_.add("null_token", h, 1);
  for (int i = 0; i < arch.blocks; ++i) {
    const auto tag = std::to_string(i);
    w1_.push_back(params_.add("block" + tag + ".w1", h, h));
    b1_.push_back(params_.add("block" + tag + ".b1", h, 1));
    w2_.push_back(params_.add("block" + tag + ".w2", h, h));
    b2_.push_back(params_.add("block" + tag + ".b2", h, 1));
  }
  w_out_ = params_.add("w_out", arch.input_dim, h);
  b_out_ = params_.add("b_out", arch.input_dim, 1);
  params_.finalize();

  Rng rng(init_seed);
  for (int id : {w_in_, w_t1_, w_t2_, w_c1_, w_c2_}) nn::init_uniform_fan_in(params_.mat(id), rng);
  nn::init_uniform_fan_in(params_.mat(null_token_), rng);
  for (int i = 0; i < arch.blocks; ++i) {
    nn::init_uniform_fan_in(params_.mat(w1_[i]), rng);
    nn::init_uniform_fan_in(params_.mat(w2_[i]), rng);
  }
  if (mode == InitMode::full_random) {
    nn::init_uniform_fan_in(params_.mat(w_out_), rng);
    for (int id : {b_in_, b_t1_, b_t2_, b_c1_, b_c2_, b_out_})
      nn::init_uniform_fan_in(params_.mat(id), rng);
    for (int i = 0; i < arch.blocks; ++i) {
      nn::init_uniform_fan_in(params_.mat(b1_[i]), rng);
      nn::init_uniform_fan_in(params_.mat(b2_[i]), rng);
    }
  }
  // default mode keeps the output head at zero so an untrained model predicts
  // zero noise everywhere
}

Eigen::MatrixXd DenoiserModel::sinusoidal(std::span<const int> ts) const {
  const int dim = arch_.time_embed_dim;
  const int half = dim / 2;
  Eigen::MatrixXd s(dim, static_cast<Eigen::Index>(ts.size()));
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    const auto t = static_cast<double>(ts[static_cast<std::size_t>(c)]);
    for (int i = 0; i < half; ++i) {
      const double freq =
          half > 1 ? std::exp(-std::log(10000.0) * i / static_cast<double>(half - 1)) : 1.0;
      s(2 * i, c) = std::sin(t * freq);
      s(2 * i + 1, c) = std::cos(t * freq);
    }
  }
  return s;
}

Eigen::MatrixXd DenoiserModel::forward_cached(const Eigen::MatrixXd& x,
                                              std::span<const Cond> conds,
                                              std::span<const int> ts, Workspace& ws) const {
  if (x.rows() != arch_.input_dim) throw std::invalid_argument("denoiser: input width mismatch");
  const auto cols = x.cols();
  if (static_cast<Eigen::Index>(conds.size()) != cols ||
      static_cast<Eigen::Index>(ts.size()) != cols)
    throw std::invalid_argument("denoiser: batch metadata mismatch");

  const auto& p = params_;
  ws.x = x;
  ws.sin_emb = sinusoidal(ts);
  ws.cond_raw.resize(1, cols);
  ws.is_null.assign(static_cast<std::size_t>(cols), false);
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto& cd = conds[static_cast<std::size_t>(c)];
    ws.is_null[static_cast<std::size_t>(c)] = cd.is_null;
    ws.cond_raw(0, c) = cd.is_null ? 0.0 : cd.value / arch_.cond_scale;
  }

  ws.zt1 = (p.mat(w_t1_) * ws.sin_emb).colwise() + p.mat(b_t1_).col(0);
  ws.ht1 = nn::silu_mat(ws.zt1);
  Eigen::MatrixXd temb = (p.mat(w_t2_) * ws.ht1).colwise() + p.mat(b_t2_).col(0);

  ws.zc1 = (p.mat(w_c1_) * ws.cond_raw).colwise() + p.mat(b_c1_).col(0);
  ws.hc1 = nn::silu_mat(ws.zc1);
  Eigen::MatrixXd cemb = (p.mat(w_c2_) * ws.hc1).colwise() + p.mat(b_c2_).col(0);
  for (Eigen::Index c = 0; c < cols; ++c)
    if (ws.is_null[static_cast<std::size_t>(c)]) cemb.col(c) = p.mat(null_token_).col(0);

  const Eigen::MatrixXd emb = temb + cemb;

  ws.z0 = ((p.mat(w_in_) * x).colwise() + p.mat(b_in_).col(0)) + emb;
  ws.h.assign(1, nn::silu_mat(ws.z0));
  ws.z.clear();
  ws.u.clear();
  for (int i = 0; i < arch_.blocks; ++i) {
    ws.z.push_back(((p.mat(w1_[i]) * ws.h.back()).colwise() + p.mat(b1_[i]).col(0)) + emb);
    ws.u.push_back(nn::silu_mat(ws.z.back()));
    ws.h.push_back(ws.h.back() +
                   ((p.mat(w2_[i]) * ws.u.back()).colwise() + p.mat(b2_[i]).col(0)));
  }
  return (p.mat(w_out_) * ws.h.back()).colwise() + p.mat(b_out_).col(0);
}

Eigen::MatrixXd DenoiserModel::predict(const Eigen::MatrixXd& x, std::span<const Cond> conds,
                                       std::span<const int> ts) const {
  Workspace ws;
  return forward_cached(x, conds, ts, ws);
}

void DenoiserModel::backward(const Workspace& ws, const Eigen::MatrixXd& dout) {
  auto& p = params_;
  const auto cols = ws.x.cols();

  p.grad(w_out_).noalias() += dout * ws.h.back().transpose();
  p.grad(b_out_).col(0) += dout.rowwise().sum();
  Eigen::MatrixXd dh = p.mat(w_out_).transpose() * dout;

  Eigen::MatrixXd demb = Eigen::MatrixXd::Zero(arch_.hidden, cols);
  for (int i = arch_.blocks - 1; i >= 0; --i) {
    p.grad(b2_[i]).col(0) += dh.rowwise().sum();
    p.grad(w2_[i]).noalias() += dh * ws.u[static_cast<std::size_t>(i)].transpose();
    Eigen::MatrixXd du = p.mat(w2_[i]).transpose() * dh;
    Eigen::MatrixXd dz = du.cwiseProduct(nn::silu_prime_mat(ws.z[static_cast<std::size_t>(i)]));
    p.grad(w1_[i]).noalias() += dz * ws.h[static_cast<std::size_t>(i)].transpose();
    p.grad(b1_[i]).col(0) += dz.rowwise().sum();
    demb += dz;
    dh.noalias() += p.mat(w1_[i]).transpose() * dz;
  }

  Eigen::MatrixXd dz0 = dh.cwiseProduct(nn::silu_prime_mat(ws.z0));
  p.grad(w_in_).noalias() += dz0 * ws.x.transpose();
  p.grad(b_in_).col(0) += dz0.rowwise().sum();
  demb += dz0;

  // time-embedding path
  p.grad(w_t2_).noalias() += demb * ws.ht1.transpose();
  p.grad(b_t2_).col(0) += demb.rowwise().sum();
  Eigen::MatrixXd dht1 = p.mat(w_t2_).transpose() * demb;
  Eigen::MatrixXd dzt1 = dht1.cwiseProduct(nn::silu_prime_mat(ws.zt1));
  p.grad(w_t1_).noalias() += dzt1 * ws.sin_emb.transpose();
  p.grad(b_t1_).col(0) += dzt1.rowwise().sum();

  // condition path: null columns feed the token, the rest feed the MLP
  Eigen::MatrixXd dcemb = demb;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (ws.is_null[static_cast<std::size_t>(c)]) {
      p.grad(null_token_).col(0) += dcemb.col(c);
      dcemb.col(c).setZero();
    }
  }
  p.grad(w_c2_).noalias() += dcemb * ws.hc1.transpose();
  p.grad(b_c2_).col(0) += dcemb.rowwise().sum();
  Eigen::MatrixXd dhc1 = p.mat(w_c2_).transpose() * dcemb;
  Eigen::MatrixXd dzc1 = dhc1.cwiseProduct(nn::silu_prime_mat(ws.zc1));
  p.grad(w_c1_).noalias() += dzc1 * ws.cond_raw.transpose();
  p.grad(b_c1_).col(0) += dzc1.rowwise().sum();
}

double cfg_loss_on_batch(DenoiserModel& model, const TrainingBatch& batch) {
  DenoiserModel::Workspace ws;
  const Eigen::MatrixXd out = model.forward_cached(batch.x_t, batch.conds, batch.ts, ws);
  const auto b = static_cast<double>(batch.x_t.cols());
  const Eigen::MatrixXd diff = out - batch.eps;
  const double loss = diff.colwise().squaredNorm().mean();
  if (!std::isfinite(loss))
    throw std::runtime_error("cfg_loss: non-finite loss over a batch of " +
                             std::to_string(batch.x_t.cols()) + " (check input scaling)");
  model.params().zero_grad();
  model.backward(ws, (2.0 / b) * diff);
  return loss;
}

double cfg_loss(DenoiserModel& model, const Eigen::MatrixXd& tau0s,
                const Eigen::VectorXd& cond_values, const NoiseSchedule& sched, double dropout_p,
                Rng& rng) {
  const TrainingBatch batch = make_training_batch(tau0s, cond_values, sched, dropout_p, rng);
  return cfg_loss_on_batch(model, batch);
}

TrainResult train(DenoiserModel& model, const Eigen::MatrixXd& tau0s,
                  const Eigen::VectorXd& cond_values, const NoiseSchedule& sched,
                  const TrainConfig& cfg) {
  if (tau0s.cols() < 1) throw std::invalid_argument("train: empty trajectory set");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("train: bad learning rate");

  Rng rng(cfg.seed, RngStream::denoiser_train);
  nn::Adam opt(model.params().size());
  std::optional<nn::Ema> ema;
  if (cfg.ema_decay > 0.0) ema.emplace(cfg.ema_decay, model.params().data());

  TrainResult result;
  result.loss_curve.reserve(static_cast<std::size_t>(cfg.train_steps));
  const auto n = tau0s.cols();
  Eigen::MatrixXd batch_x(tau0s.rows(), cfg.batch_size);
  Eigen::VectorXd batch_c(cfg.batch_size);
  for (std::int64_t step = 1; step <= cfg.train_steps; ++step) {
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto i = rng.uniform_int(0, n - 1);
      batch_x.col(b) = tau0s.col(i);
      batch_c(b) = cond_values(i);
    }
    double loss = 0.0;
    try {
      loss = cfg_loss(model, batch_x, batch_c, sched, cfg.dropout_p, rng);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step) + " (" +
                               e.what() + ")");
    }
    opt.step(model.params().data(), model.params().grad_vector(), cfg.learning_rate);
    if (ema) ema->update(model.params().data());
    result.loss_curve.push_back(loss);
  }
  if (ema) model.params().data() = ema->shadow();

  const auto steps = result.loss_curve.size();
  const auto decile = std::max<std::size_t>(1, steps / 10);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < decile; ++i) {
    first += result.loss_curve[i];
    last += result.loss_curve[steps - 1 - i];
  }
  result.first_decile_mean = first / static_cast<double>(decile);
  result.last_decile_mean = last / static_cast<double>(decile);
  return result;
}

}  // namespace gtg
