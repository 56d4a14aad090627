#include "gtg/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "gtg/stats.hpp"

namespace gtg {

double branin(double x1, double x2) {
  constexpr double a = 1.0;
  const double b = 5.1 / (4.0 * std::numbers::pi * std::numbers::pi);
  const double c = 5.0 / std::numbers::pi;
  constexpr double r = 6.0;
  constexpr double s = 10.0;
  const double t = 1.0 / (8.0 * std::numbers::pi);
  const double inner = x2 - b * x1 * x1 + c * x1 - r;
  return -a * inner * inner - s * (1.0 - t) * std::cos(x1) - s;
}

Oracle branin_oracle() {
  Oracle o;
  o.name = "branin";
  o.dim = 2;
  o.lo = Eigen::Vector2d(-5.0, 0.0);
  o.hi = Eigen::Vector2d(10.0, 15.0);
  o.optimum_value = -0.397887;
  o.optima = {Eigen::Vector2d(-std::numbers::pi, 12.275), Eigen::Vector2d(std::numbers::pi, 2.275),
              Eigen::Vector2d(9.42478, 2.475)};
  o.evaluate = [](const Eigen::VectorXd& x) { return branin(x(0), x(1)); };
  return o;
}

Oracle sphere_oracle(int dim) {
  Oracle o;
  o.name = "sphere";
  o.dim = dim;
  o.lo = Eigen::VectorXd::Constant(dim, -1.0);
  o.hi = Eigen::VectorXd::Constant(dim, 1.0);
  o.optimum_value = 0.0;
  o.optima = {Eigen::VectorXd::Zero(dim)};
  o.evaluate = [](const Eigen::VectorXd& x) { return -x.squaredNorm(); };
  return o;
}

Oracle oracle_by_name(const std::string& name, int dim) {
  if (name == "branin") return branin_oracle();
  if (name == "sphere") return sphere_oracle(dim);
  throw std::invalid_argument("unknown oracle '" + name + "'");
}

OfflineDataset make_oracle_dataset(const Oracle& oracle, int n_samples, double trim_top_fraction,
                                   std::uint64_t seed) {
  if (n_samples < 10) throw std::invalid_argument("oracle dataset: need n_samples >= 10");
  if (!(trim_top_fraction >= 0.0 && trim_top_fraction < 1.0))
    throw std::invalid_argument("oracle dataset: trim fraction must be in [0,1)");
  Rng rng(seed, RngStream::dataset_gen);
  Eigen::MatrixXd designs(oracle.dim, n_samples);
  Eigen::VectorXd scores(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    for (int k = 0; k < oracle.dim; ++k) designs(k, i) = rng.uniform(oracle.lo(k), oracle.hi(k));
    scores(i) = oracle.evaluate(designs.col(i));
  }
  const int drop = static_cast<int>(trim_top_fraction * n_samples);
  if (drop == 0) return make_dataset(std::move(designs), std::move(scores));

  // Remove the `drop` highest-scoring rows (ties toward the larger index so
  // earlier draws survive), keeping the remaining rows in draw order.
  std::vector<int> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scores(a) > scores(b) || (scores(a) == scores(b) && a > b);
  });
  std::vector<bool> removed(static_cast<std::size_t>(n_samples), false);
  for (int i = 0; i < drop; ++i) removed[static_cast<std::size_t>(order[i])] = true;
  const int keep = n_samples - drop;
  Eigen::MatrixXd kept_designs(oracle.dim, keep);
  Eigen::VectorXd kept_scores(keep);
  int w = 0;
  for (int i = 0; i < n_samples; ++i) {
    if (removed[static_cast<std::size_t>(i)]) continue;
    kept_designs.col(w) = designs.col(i);
    kept_scores(w) = scores(i);
    ++w;
  }
  return make_dataset(std::move(kept_designs), std::move(kept_scores));
}

OfflineDataset make_branin_dataset(int n_samples, double trim_top_fraction, std::uint64_t seed) {
  return make_oracle_dataset(branin_oracle(), n_samples, trim_top_fraction, seed);
}

OfflineDataset corrupt_dataset(const OfflineDataset& ds, CorruptMode mode, double level,
                               std::uint64_t seed) {
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("corrupt: level must be in (0,1]");
  Rng rng(seed, RngStream::corrupt);
  if (mode == CorruptMode::sparse) {
    const int keep = static_cast<int>(level * ds.size());
    if (keep < 10) throw std::invalid_argument("corrupt: sparse result below 10 rows");
    std::vector<int> idx(static_cast<std::size_t>(ds.size()));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < keep; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(i, ds.size() - 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
    }
    std::vector<int> chosen(idx.begin(), idx.begin() + keep);
    std::sort(chosen.begin(), chosen.end());  // preserve original row order
    Eigen::MatrixXd designs(ds.dim(), keep);
    Eigen::VectorXd scores(keep);
    for (int i = 0; i < keep; ++i) {
      designs.col(i) = ds.designs.col(chosen[static_cast<std::size_t>(i)]);
      scores(i) = ds.scores(chosen[static_cast<std::size_t>(i)]);
    }
    return make_dataset(std::move(designs), std::move(scores), ds.space);
  }
  Eigen::VectorXd scores(ds.size());
  for (int i = 0; i < ds.size(); ++i) {
    const double noisy = ds.normalize_score(ds.scores(i)) + level * rng.normal();
    scores(i) = ds.denormalize_score(noisy);
  }
  return make_dataset(ds.designs, std::move(scores), ds.space);
}

EvalReport evaluate_candidates(CandidateSet& cands, const Oracle& oracle,
                               const OfflineDataset& ds) {
  if (cands.size() < 1) throw std::invalid_argument("evaluate: empty candidate set");
  EvalReport rep;
  rep.n_candidates = cands.size();
  cands.oracle_scores.resize(cands.size());
  std::vector<double> normalized(static_cast<std::size_t>(cands.size()));
  for (int i = 0; i < cands.size(); ++i) {
    Eigen::VectorXd x = cands.designs.col(i);
    bool clamped = false;
    for (int k = 0; k < oracle.dim; ++k) {
      const double v = std::clamp(x(k), oracle.lo(k), oracle.hi(k));
      clamped |= v != x(k);
      x(k) = v;
    }
    if (clamped) ++rep.clamped;
    cands.oracle_scores(i) = oracle.evaluate(x);
    normalized[static_cast<std::size_t>(i)] = ds.normalize_score(cands.oracle_scores(i));
  }
  rep.p100 = percentile_nearest_rank(normalized, 100.0);
  rep.p80 = percentile_nearest_rank(normalized, 80.0);
  rep.p50 = percentile_nearest_rank(normalized, 50.0);
  rep.best_normalized = rep.p100;
  rep.best_raw = cands.oracle_scores.maxCoeff();
  return rep;
}

double diversity(const Eigen::MatrixXd& designs, SpaceKind metric) {
  const auto n = designs.cols();
  if (n < 2) throw std::invalid_argument("diversity: need at least 2 designs");
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (metric == SpaceKind::discrete) {
        for (Eigen::Index k = 0; k < designs.rows(); ++k)
          if (designs(k, i) != designs(k, j)) total += 1.0;
      } else {
        total += (designs.col(i) - designs.col(j)).norm();
      }
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace gtg
