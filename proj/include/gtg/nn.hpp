#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gtg/rng.hpp"

namespace gtg::nn {

struct TensorSpec {
  std::string name;
  int rows = 0, cols = 0;
  std::int64_t offset = 0;
  std::int64_t count() const { return static_cast<std::int64_t>(rows) * cols; }
};

// Flat parameter vector with named matrix views, plus a parallel gradient
// buffer. Register tensors first, then finalize() once; views stay valid for
// the lifetime of the store.
class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols) {
    if (finalized_) throw std::logic_error("ParamStore: add after finalize");
    TensorSpec s{name, rows, cols, next_};
    next_ += s.count();
    specs_.push_back(std::move(s));
    return static_cast<int>(specs_.size()) - 1;
  }

  void finalize() {
    data_ = Eigen::VectorXd::Zero(next_);
    grad_ = Eigen::VectorXd::Zero(next_);
    finalized_ = true;
  }

  Eigen::Map<Eigen::MatrixXd> mat(int id) {
    const auto& s = specs_[static_cast<std::size_t>(id)];
    return {data_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<const Eigen::MatrixXd> mat(int id) const {
    const auto& s = specs_[static_cast<std::size_t>(id)];
    return {data_.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<Eigen::MatrixXd> grad(int id) {
    const auto& s = specs_[static_cast<std::size_t>(id)];
    return {grad_.data() + s.offset, s.rows, s.cols};
  }

  Eigen::VectorXd& data() { return data_; }
  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& grad_vector() { return grad_; }
  void zero_grad() { grad_.setZero(); }
  std::int64_t size() const { return next_; }
  const std::vector<TensorSpec>& specs() const { return specs_; }

 private:
  std::vector<TensorSpec> specs_;
  Eigen::VectorXd data_, grad_;
  std::int64_t next_ = 0;
  bool finalized_ = false;
};

// Kaiming-uniform style fan-in init for a weight matrix view.
inline void init_uniform_fan_in(Eigen::Map<Eigen::MatrixXd> w, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
  for (int c = 0; c < w.cols(); ++c)
    for (int r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
}

// Adaptive moment estimation with bias correction; (0.9, 0.999) moments.
class Adam {
 public:
  explicit Adam(std::int64_t n, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)),
        beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    if (lr == 0.0) return;  // moments advance, parameters stay bit-identical
    params.array() -=
        (lr / bc1) * m_.array() / ((v_.array() / bc2).sqrt() + eps_);
  }

 private:
  Eigen::VectorXd m_, v_;
  double beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

// Exponential moving average of a parameter vector.
class Ema {
 public:
  Ema(double decay, const Eigen::VectorXd& init) : decay_(decay), shadow_(init) {}
  void update(const Eigen::VectorXd& params) {
    shadow_ = decay_ * shadow_ + (1.0 - decay_) * params;
  }
  const Eigen::VectorXd& shadow() const { return shadow_; }

 private:
  double decay_;
  Eigen::VectorXd shadow_;
};

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_prime(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

// Elementwise SiLU on a matrix, and its derivative evaluated at the
// pre-activation.
inline Eigen::MatrixXd silu_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double x) { return silu(x); });
}
inline Eigen::MatrixXd silu_prime_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double x) { return silu_prime(x); });
}

inline Eigen::MatrixXd relu_mat(const Eigen::MatrixXd& z) {
  return z.cwiseMax(0.0);
}
inline Eigen::MatrixXd relu_prime_mat(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

}  // namespace gtg::nn
