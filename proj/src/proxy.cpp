#include "gtg/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gtg/stats.hpp"

namespace gtg {

RankWeights rank_weights(const Eigen::VectorXd& scores, double k) {
  const auto n = scores.size();
  if (n < 1) throw std::invalid_argument("rank_weights: empty scores");
  if (!(k > 0.0)) throw std::invalid_argument("rank_weights: k must be > 0");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) > scores(b); });

  Eigen::VectorXd ranks(n);
  int rank = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && scores(order[i]) != scores(order[i - 1])) ++rank;
    ranks(order[i]) = rank;
  }

  RankWeights rw;
  rw.k = k;
  rw.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) rw.w(i) = 1.0 / (k * static_cast<double>(n) + ranks(i));
  rw.w *= static_cast<double>(n) / rw.w.sum();
  return rw;
}

ProxyModel::ProxyModel(const ProxyArch& arch, std::uint64_t init_seed) : arch_(arch) {
  if (arch.input_dim < 1 || arch.hidden < 1 || arch.layers < 1)
    throw std::invalid_argument("proxy: bad architecture");
  int in = arch.input_dim;
  for (int i = 0; i < arch.layers; ++i) {
    const auto tag = std::to_string(i);
    w_.push_back(params_.add("layer" + tag + ".w", arch.hidden, in));
    b_.push_back(params_.add("layer" + tag + ".b", arch.hidden, 1));
    in = arch.hidden;
  }
  w_out_ = params_.add("head.w", 1, in);
  b_out_ = params_.add("head.b", 1, 1);
  params_.finalize();
  Rng rng(init_seed);
  for (int id : w_) nn::init_uniform_fan_in(params_.mat(id), rng);
  nn::init_uniform_fan_in(params_.mat(w_out_), rng);
}

Eigen::VectorXd ProxyModel::forward_cached(const Eigen::MatrixXd& x, Workspace& ws) const {
  if (x.rows() != arch_.input_dim) throw std::invalid_argument("proxy: input width mismatch");
  ws.x = x;
  ws.z.clear();
  ws.h.clear();
  const Eigen::MatrixXd* in = &ws.x;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    ws.z.push_back((params_.mat(w_[i]) * (*in)).colwise() + params_.mat(b_[i]).col(0));
    ws.h.push_back(nn::relu_mat(ws.z.back()));
    in = &ws.h.back();
  }
  return ((params_.mat(w_out_) * (*in)).colwise() + params_.mat(b_out_).col(0)).row(0);
}

Eigen::VectorXd ProxyModel::predict(const Eigen::MatrixXd& x_scaled) const {
  Workspace ws;
  return forward_cached(x_scaled, ws);
}

double ProxyModel::predict_one(const Eigen::VectorXd& x_scaled) const {
  return predict(x_scaled)(0);
}

Eigen::MatrixXd ProxyModel::backward(const Workspace& ws, const Eigen::VectorXd& dpred) {
  Eigen::MatrixXd dh = params_.mat(w_out_).transpose() * dpred.transpose();
  params_.grad(w_out_).noalias() += dpred.transpose() * ws.h.back().transpose();
  params_.grad(b_out_)(0, 0) += dpred.sum();
  for (int i = static_cast<int>(w_.size()) - 1; i >= 0; --i) {
    const Eigen::MatrixXd dz =
        dh.cwiseProduct(nn::relu_prime_mat(ws.z[static_cast<std::size_t>(i)]));
    const Eigen::MatrixXd& below = i == 0 ? ws.x : ws.h[static_cast<std::size_t>(i) - 1];
    params_.grad(w_[static_cast<std::size_t>(i)]).noalias() += dz * below.transpose();
    params_.grad(b_[static_cast<std::size_t>(i)]).col(0) += dz.rowwise().sum();
    dh = params_.mat(w_[static_cast<std::size_t>(i)]).transpose() * dz;
  }
  return dh;  // d/d(input)
}

Eigen::VectorXd ProxyModel::input_gradient(const Eigen::VectorXd& x_scaled) const {
  Workspace ws;
  forward_cached(x_scaled, ws);
  Eigen::MatrixXd dh = params_.mat(w_out_).transpose();  // hidden x 1
  for (int i = static_cast<int>(w_.size()) - 1; i >= 0; --i) {
    const Eigen::MatrixXd dz =
        dh.cwiseProduct(nn::relu_prime_mat(ws.z[static_cast<std::size_t>(i)]));
    dh = params_.mat(w_[static_cast<std::size_t>(i)]).transpose() * dz;
  }
  return dh.col(0);
}

ProxyModel fit_mlp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& weights, const ProxyArch& arch, const TrainConfig& cfg,
                   std::vector<double>* curve) {
  const auto n = inputs.cols();
  if (n < 1 || targets.size() != n || weights.size() != n)
    throw std::invalid_argument("fit_mlp: inconsistent inputs");
  ProxyModel model(arch, cfg.seed);
  nn::Adam opt(model.params().size());
  Rng rng(cfg.seed, RngStream::proxy_train);
  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(n));
  Eigen::MatrixXd bx(inputs.rows(), batch);
  Eigen::VectorXd by(batch), bw(batch);
  ProxyModel::Workspace ws;
  for (std::int64_t step = 1; step <= cfg.train_steps; ++step) {
    for (int b = 0; b < batch; ++b) {
      const auto i = rng.uniform_int(0, n - 1);
      bx.col(b) = inputs.col(i);
      by(b) = targets(i);
      bw(b) = weights(i);
    }
    const Eigen::VectorXd pred = model.forward_cached(bx, ws);
    const Eigen::VectorXd err = pred - by;
    const double wsum = bw.sum();
    const double loss = bw.cwiseProduct(err.cwiseAbs2()).sum() / wsum;
    if (!std::isfinite(loss))
      throw std::runtime_error("fit_mlp: non-finite loss at step " + std::to_string(step));
    model.params().zero_grad();
    model.backward(ws, (2.0 / wsum) * bw.cwiseProduct(err));
    opt.step(model.params().data(), model.params().grad_vector(), cfg.learning_rate);
    if (curve) curve->push_back(loss);
  }
  return model;
}

ProxyModel train_proxy(const OfflineDataset& ds, const TrainConfig& cfg,
                       const RankWeights& weights, const ProxyArch& arch,
                       ProxyValidation* validation, std::vector<double>* curve) {
  const int n = ds.size();
  if (n < 10) throw std::invalid_argument("train_proxy: need at least 10 rows");
  if (weights.w.size() != n) throw std::invalid_argument("train_proxy: weight size mismatch");

  Eigen::MatrixXd scaled(ds.dim(), n);
  Eigen::VectorXd targets(n);
  for (int i = 0; i < n; ++i) {
    scaled.col(i) = ds.scale_design(ds.designs.col(i));
    targets(i) = ds.normalize_score(ds.scores(i));
  }

  Rng split_rng(cfg.seed, RngStream::proxy_split);
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(split_rng.uniform_int(0, i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  const int n_val = std::max(1, n / 10);
  const int n_train = n - n_val;

  Eigen::MatrixXd train_x(ds.dim(), n_train);
  Eigen::VectorXd train_y(n_train), train_w(n_train);
  for (int i = 0; i < n_train; ++i) {
    const int row = idx[static_cast<std::size_t>(i)];
    train_x.col(i) = scaled.col(row);
    train_y(i) = targets(row);
    train_w(i) = weights.w(row);
  }
  ProxyModel model = fit_mlp(train_x, train_y, train_w, arch, cfg, curve);

  if (validation) {
    Eigen::MatrixXd val_x(ds.dim(), n_val);
    Eigen::VectorXd val_y(n_val);
    for (int i = 0; i < n_val; ++i) {
      const int row = idx[static_cast<std::size_t>(n_train + i)];
      val_x.col(i) = scaled.col(row);
      val_y(i) = targets(row);
    }
    const Eigen::VectorXd pred = model.predict(val_x);
    validation->rmse = std::sqrt((pred - val_y).squaredNorm() / n_val);
    validation->spearman =
        n_val >= 2 ? spearman(std::span<const double>(pred.data(), static_cast<std::size_t>(n_val)),
                              std::span<const double>(val_y.data(), static_cast<std::size_t>(n_val)))
                   : 0.0;
    validation->n_train = n_train;
    validation->n_val = n_val;
    validation->split_seed = cfg.seed;
  }
  return model;
}

CandidateSet filter_top_q(const CandidateSet& cands, const ProxyModel& proxy,
                          const OfflineDataset& ds, int Q) {
  if (Q < 1) throw std::invalid_argument("filter_top_q: Q must be >= 1");
  if (cands.size() < 1) throw std::invalid_argument("filter_top_q: empty candidate list");

  Eigen::MatrixXd scaled(ds.dim(), cands.size());
  for (int i = 0; i < cands.size(); ++i) scaled.col(i) = ds.scale_design(cands.designs.col(i));
  const Eigen::VectorXd pred = proxy.predict(scaled);

  std::vector<int> order(static_cast<std::size_t>(cands.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pred(a) > pred(b); });

  const int q = std::min<int>(Q, cands.size());
  CandidateSet out;
  out.designs.resize(cands.designs.rows(), q);
  out.proxy_scores.resize(q);
  out.provenance.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    out.designs.col(i) = cands.designs.col(src);
    out.proxy_scores(i) = pred(src);
    out.provenance[static_cast<std::size_t>(i)] =
        cands.provenance.empty() ? CandidateSet::Provenance{}
                                 : cands.provenance[static_cast<std::size_t>(src)];
  }
  return out;
}

Eigen::MatrixXd gradient_ascent(const ProxyModel& proxy, Eigen::MatrixXd starts_scaled, int steps,
                                double step_size) {
  for (int s = 0; s < steps; ++s)
    for (Eigen::Index c = 0; c < starts_scaled.cols(); ++c)
      starts_scaled.col(c) += step_size * proxy.input_gradient(starts_scaled.col(c));
  return starts_scaled;
}

}  // namespace gtg
