#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gtg/diffusion.hpp"
#include "gtg/stats.hpp"

using namespace gtg;

namespace {

// Test double with distinct conditional / unconditional behavior.
struct ToyModel : EpsilonModel {
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, std::span<const Cond> conds,
                          std::span<const int> ts) const override {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const auto& cd = conds[static_cast<std::size_t>(c)];
      const double scale = cd.is_null ? 1.37 : 0.61 + 0.01 * cd.value;
      out.col(c) = scale * x.col(c).array().sin().matrix() +
                   Eigen::VectorXd::Constant(x.rows(), 0.1 * ts[static_cast<std::size_t>(c)]);
    }
    return out;
  }
};

// Exact noise predictor for scalar data ~ N(mu, sigma0^2): the conditional
// expectation E[eps | x_t] is linear in x_t.
struct GaussianOptimal : EpsilonModel {
  const NoiseSchedule* sched;
  double mu, sigma0;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, std::span<const Cond>,
                          std::span<const int> ts) const override {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double ab = sched->alpha_bar_at(ts[static_cast<std::size_t>(c)]);
      const double st2 = ab * sigma0 * sigma0 + (1.0 - ab);
      out.col(c) = std::sqrt(1.0 - ab) / st2 * (x.col(c).array() - std::sqrt(ab) * mu).matrix();
    }
    return out;
  }
};

// Recovers the exact noise from the clean batch it was built around.
struct OracleDenoiser : EpsilonModel {
  const NoiseSchedule* sched;
  const Eigen::MatrixXd* tau0s;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, std::span<const Cond>,
                          std::span<const int> ts) const override {
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double ab = sched->alpha_bar_at(ts[static_cast<std::size_t>(c)]);
      out.col(c) = (x.col(c) - std::sqrt(ab) * tau0s->col(c)) / std::sqrt(1.0 - ab);
    }
    return out;
  }
};

struct ZeroModel : EpsilonModel {
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x, std::span<const Cond>,
                          std::span<const int>) const override {
    return Eigen::MatrixXd::Zero(x.rows(), x.cols());
  }
};

NoiseSchedule synthetic_schedule(std::initializer_list<double> betas) {
  NoiseSchedule s;
  s.T = static_cast<int>(betas.size());
  s.beta.resize(s.T);
  s.alpha.resize(s.T);
  s.alpha_bar.resize(s.T);
  int i = 0;
  double prod = 1.0;
  for (double b : betas) {
    s.beta(i) = b;
    s.alpha(i) = 1.0 - b;
    prod *= s.alpha(i);
    s.alpha_bar(i) = prod;
    ++i;
  }
  return s;
}

}  // namespace

TEST_CASE("schedule arithmetic and invariants") {
  const auto one = make_schedule(1, ScheduleKind::linear, 0.02, 0.02);
  CHECK(one.alpha_bar(0) == doctest::Approx(0.98));

  const auto lin = make_schedule(2, ScheduleKind::linear, 0.1, 0.2);
  CHECK(lin.beta(0) == doctest::Approx(0.1));
  CHECK(lin.beta(1) == doctest::Approx(0.2));
  CHECK(lin.alpha_bar(0) == doctest::Approx(0.9));
  CHECK(lin.alpha_bar(1) == doctest::Approx(0.72));

  const auto cos = make_schedule(200, ScheduleKind::cosine);
  CHECK(cos.alpha_bar(199) < 0.01);
  CHECK(cos.alpha_bar(0) < 1.0);
  for (int i = 1; i < 200; ++i) CHECK(cos.alpha_bar(i) < cos.alpha_bar(i - 1));

  // product identity to 1e-12 on both schedule kinds
  for (const auto& s : {cos, make_schedule(150, ScheduleKind::linear)}) {
    double prod = 1.0;
    for (int i = 0; i < s.T; ++i) {
      CHECK(s.beta(i) > 0.0);
      CHECK(s.beta(i) < 1.0);
      prod *= 1.0 - s.beta(i);
      CHECK(std::abs(s.alpha_bar(i) - prod) <= 1e-12);
    }
  }

  CHECK_THROWS_AS(make_schedule(0, ScheduleKind::cosine), std::invalid_argument);
}

TEST_CASE("forward noising limits and arithmetic") {
  Eigen::MatrixXd tau0 = Eigen::MatrixXd::Constant(3, 2, 1.0);
  Eigen::MatrixXd noise = Eigen::MatrixXd::Constant(3, 2, 1.0);

  auto nearly_one = synthetic_schedule({1e-16});
  CHECK((forward_noise(nearly_one, tau0, 1, noise) - tau0).cwiseAbs().maxCoeff() < 1e-7);

  auto quarter = synthetic_schedule({0.75});  // alpha_bar = 0.25
  const auto noised = forward_noise(quarter, tau0, 1, noise);
  CHECK(noised(0, 0) == doctest::Approx(0.5 + std::sqrt(0.75)).epsilon(1e-10));

  Eigen::MatrixXd bad(2, 2);
  CHECK_THROWS_AS(forward_noise(quarter, tau0, 1, bad), std::invalid_argument);
  CHECK_THROWS_AS(forward_noise(quarter, tau0, 2, noise), std::invalid_argument);
}

TEST_CASE("composed single-step noisings match the closed-form marginal") {
  const auto sched = make_schedule(60, ScheduleKind::cosine);
  const int t = 30;
  const double x0 = 1.7;
  const int n = 10000;

  Rng rng(4);
  std::vector<double> composed(n), direct(n);
  for (int i = 0; i < n; ++i) {
    double x = x0;
    for (int s = 1; s <= t; ++s)
      x = std::sqrt(1.0 - sched.beta_at(s)) * x + std::sqrt(sched.beta_at(s)) * rng.normal();
    composed[static_cast<std::size_t>(i)] = x;
    const double ab = sched.alpha_bar_at(t);
    direct[static_cast<std::size_t>(i)] = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * rng.normal();
  }
  const double ab = sched.alpha_bar_at(t);
  const double true_mean = std::sqrt(ab) * x0;
  const double true_sd = std::sqrt(1.0 - ab);
  const double mean_tol = 3.0 * true_sd / std::sqrt(static_cast<double>(n));
  const double sd_tol = 3.0 * true_sd / std::sqrt(2.0 * n);

  for (const auto& xs : {composed, direct}) {
    CHECK(std::abs(mean(xs) - true_mean) < mean_tol);
    CHECK(std::abs(stddev(xs) - true_sd) < sd_tol);
  }
}

TEST_CASE("training batches honor dropout and the noising identity") {
  const auto sched = make_schedule(50, ScheduleKind::cosine);
  Rng rng(9);
  Eigen::MatrixXd tau0s = Eigen::MatrixXd::Random(6, 40);
  Eigen::VectorXd conds = Eigen::VectorXd::LinSpaced(40, 0.0, 4.0);

  auto all_dropped = make_training_batch(tau0s, conds, sched, 1.0, rng);
  for (const auto& c : all_dropped.conds) CHECK(c.is_null);

  auto none_dropped = make_training_batch(tau0s, conds, sched, 0.0, rng);
  for (Eigen::Index c = 0; c < 40; ++c) {
    CHECK_FALSE(none_dropped.conds[static_cast<std::size_t>(c)].is_null);
    CHECK(none_dropped.conds[static_cast<std::size_t>(c)].value == conds(c));
    const int t = none_dropped.ts[static_cast<std::size_t>(c)];
    CHECK(t >= 1);
    CHECK(t <= 50);
    const double ab = sched.alpha_bar_at(t);
    const Eigen::VectorXd expect =
        std::sqrt(ab) * tau0s.col(c) + std::sqrt(1.0 - ab) * none_dropped.eps.col(c);
    CHECK((none_dropped.x_t.col(c) - expect).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("oracle denoiser drives the loss to zero; zero model to the noise floor") {
  const auto sched = make_schedule(80, ScheduleKind::cosine);
  Rng rng(13);
  const int rows = 6;
  Eigen::MatrixXd tau0s = Eigen::MatrixXd::Random(rows, 10000);
  Eigen::VectorXd conds = Eigen::VectorXd::Zero(10000);
  const auto batch = make_training_batch(tau0s, conds, sched, 0.25, rng);

  OracleDenoiser oracle;
  oracle.sched = &sched;
  oracle.tau0s = &tau0s;
  CHECK(cfg_loss_value(oracle, batch) < 1e-18);

  // E|eps|^2 = rows per element; sd of the mean over 1e4 draws is
  // sqrt(2*rows/n)
  ZeroModel zero;
  const double loss = cfg_loss_value(zero, batch);
  CHECK(std::abs(loss - rows) < 3.0 * std::sqrt(2.0 * rows / 10000.0));
}

TEST_CASE("guidance algebra is exact at omega 0 and 1") {
  ToyModel model;
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  const double cond = 2.5;
  const int t = 7;
  std::vector<Cond> uncond(3, Cond::null_token());
  std::vector<Cond> with_cond(3, Cond::of(cond));
  std::vector<int> ts(3, t);

  const Eigen::MatrixXd eps_u = model.predict(x, uncond, ts);
  const Eigen::MatrixXd eps_c = model.predict(x, with_cond, ts);

  CHECK(guided_epsilon(model, x, t, cond, 0.0) == eps_u);
  CHECK(guided_epsilon(model, x, t, cond, 1.0) == eps_c);

  const Eigen::MatrixXd mid = guided_epsilon(model, x, t, cond, 1.2);
  const Eigen::MatrixXd expect = eps_u + 1.2 * (eps_c - eps_u);
  CHECK((mid - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("denoise step arithmetic") {
  auto sched = synthetic_schedule({0.5, 0.04});
  // t=2: alpha=0.96, beta=0.04, alpha_bar=0.5*... build exact values instead
  sched.alpha_bar(1) = 0.5;
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd eps = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  const auto out = denoise_step(sched, x, 2, eps, zero);
  CHECK(out(0, 0) == doctest::Approx((1.0 - 0.04 / std::sqrt(0.5)) / std::sqrt(0.96)).epsilon(1e-9));
  CHECK(out(0, 0) == doctest::Approx(0.9630).epsilon(1e-3));

  // beta -> 0 with zero predicted noise approaches the identity
  auto tiny = synthetic_schedule({1e-12});
  Eigen::MatrixXd x2 = Eigen::MatrixXd::Random(4, 2);
  const auto same = denoise_step(tiny, x2, 1, Eigen::MatrixXd::Zero(4, 2),
                                 Eigen::MatrixXd::Zero(4, 2));
  CHECK((same - x2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("full-chain sampling with the exact Gaussian score recovers the moments") {
  const auto sched = make_schedule(200, ScheduleKind::cosine);
  GaussianOptimal model;
  model.sched = &sched;
  model.mu = 3.0;
  model.sigma0 = 0.5;

  const int n = 10000;
  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (int i = 0; i < n; ++i) rngs.emplace_back(1234, RngStream::sample_chain, i);

  GuidanceConfig guidance;
  guidance.omega = 0.0;  // unconditional
  guidance.horizon = 1;
  guidance.denoised_clip = 0.0;  // raw-scale data, no [-1,1] range to clamp to
  const Eigen::MatrixXd ctx(0, n);
  const Eigen::MatrixXd out = sample_batch_with_context(model, sched, guidance, ctx, 1, rngs);

  std::vector<double> xs(out.data(), out.data() + n);
  CHECK(std::abs(mean(xs) - 3.0) < 0.1);
  CHECK(std::abs(stddev(xs) - 0.5) < 0.05);

  // the same sampler also passes a KS test against N(3, 0.5^2)
  auto cdf = [](double v) { return 0.5 * std::erfc(-(v - 3.0) / (0.5 * std::sqrt(2.0))); };
  const double d = ks_statistic(xs, cdf);
  CHECK(d < ks_critical_value(0.01, static_cast<std::size_t>(n)));
}

TEST_CASE("context positions are overwritten bit-for-bit") {
  const auto sched = make_schedule(25, ScheduleKind::cosine);
  ToyModel model;
  GuidanceConfig guidance;
  guidance.omega = 1.2;
  guidance.alpha_level = 0.8;
  guidance.y_star = 1.0;
  guidance.horizon = 8;

  Rng rng(55);
  Eigen::VectorXd ctx(7 * 3);  // C = H-1 of width-3 steps
  for (int i = 0; i < ctx.size(); ++i) ctx(i) = rng.normal();

  Rng chain(77);
  const Eigen::VectorXd out = sample_with_context(model, sched, guidance, ctx, 8 * 3, chain);
  REQUIRE(out.size() == 24);
  for (int i = 0; i < 21; ++i) CHECK(out(i) == ctx(i));

  // C = 0 (pure guided sampling) runs with an empty context
  Rng chain2(78);
  const Eigen::VectorXd free_run =
      sample_with_context(model, sched, guidance, Eigen::VectorXd(), 8 * 3, chain2);
  CHECK(free_run.size() == 24);

  // C >= H rejected
  Eigen::VectorXd too_long(8 * 3);
  too_long.setZero();
  Rng chain3(79);
  CHECK_THROWS_AS(sample_with_context(model, sched, guidance, too_long, 8 * 3, chain3),
                  std::invalid_argument);
}
