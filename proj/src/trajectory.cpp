#include "gtg/trajectory.hpp"

#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gtg/stats.hpp"

namespace gtg {

TrajectoryDataset build_trajectories(const OfflineDataset& ds, const NeighborIndex& idx,
                                     const TrajectoryConfig& cfg, std::uint64_t seed) {
  if (cfg.H < 2) throw std::invalid_argument("trajectories: H must be >= 2");
  if (cfg.K < 1) throw std::invalid_argument("trajectories: K must be >= 1");
  if (cfg.n_traj < 1) throw std::invalid_argument("trajectories: n_traj must be >= 1");
  if (!(cfg.epsilon >= 0.0)) throw std::invalid_argument("trajectories: epsilon must be >= 0");
  if (!(cfg.p > 0.0 && cfg.p <= 100.0))
    throw std::invalid_argument("trajectories: p must be in (0,100]");

  const double eps_raw = (ds.y_max - ds.y_min) * cfg.epsilon;
  TrajectoryDataset tds;
  tds.config = cfg;
  tds.trajectories.resize(cfg.n_traj);

  for (int n = 0; n < cfg.n_traj; ++n) {
    Rng rng(seed, RngStream::trajectory, static_cast<std::uint64_t>(n));
    Trajectory traj;
    traj.designs.resize(ds.dim(), cfg.H);
    traj.raw_scores.resize(cfg.H);
    traj.norm_scores.resize(cfg.H);
    traj.source_rows.resize(cfg.H);

    int current = sample_low_percentile(ds, cfg.p, rng);
    double running_max = ds.scores(current);
    for (int h = 0; h < cfg.H; ++h) {
      if (h > 0) {
        auto candidates = idx.knn_above_threshold(ds, current, cfg.K, running_max - eps_raw);
        if (candidates.empty()) {
          // No neighbor clears the threshold; widen to the plain K nearest so
          // every trajectory still reaches length H.
          candidates = idx.knn_above_threshold(ds, current, cfg.K,
                                               -std::numeric_limits<double>::infinity());
          ++tds.fallback_steps;
        }
        current = candidates[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
        running_max = std::max(running_max, ds.scores(current));
      }
      traj.designs.col(h) = ds.designs.col(current);
      traj.raw_scores(h) = ds.scores(current);
      traj.norm_scores(h) = ds.normalize_score(ds.scores(current));
      traj.source_rows[h] = current;
    }
    tds.trajectories[n] = std::move(traj);
  }
  return tds;
}

ScoreShift score_shift_stats(const TrajectoryDataset& tds, const OfflineDataset& ds) {
  if (tds.trajectories.empty()) throw std::invalid_argument("score_shift_stats: empty trajectory set");
  std::vector<double> traj_scores;
  traj_scores.reserve(static_cast<std::size_t>(tds.size()) * tds.config.H);
  for (const auto& t : tds.trajectories)
    traj_scores.insert(traj_scores.end(), t.raw_scores.data(), t.raw_scores.data() + t.length());
  std::vector<double> ds_scores(ds.scores.data(), ds.scores.data() + ds.size());

  ScoreShift s;
  s.dataset_mean = mean(ds_scores);
  s.dataset_std = stddev(ds_scores);
  s.trajectory_mean = mean(traj_scores);
  s.trajectory_std = stddev(traj_scores);
  s.dataset_deciles = deciles(ds_scores);
  s.trajectory_deciles = deciles(traj_scores);
  return s;
}

int model_width(const OfflineDataset& ds) { return ds.dim() + 1; }

Eigen::VectorXd flatten_to_model(const Trajectory& traj, const OfflineDataset& ds) {
  const int d = traj.dim(), H = traj.length(), W = d + 1;
  Eigen::VectorXd flat(H * W);
  for (int h = 0; h < H; ++h) {
    flat.segment(h * W, d) = ds.scale_design(traj.designs.col(h));
    flat(h * W + d) = traj.norm_scores(h);
  }
  return flat;
}

Eigen::MatrixXd model_matrix(const TrajectoryDataset& tds, const OfflineDataset& ds) {
  const int H = tds.config.H, W = model_width(ds);
  Eigen::MatrixXd m(H * W, tds.size());
  for (int i = 0; i < tds.size(); ++i) m.col(i) = flatten_to_model(tds.trajectories[i], ds);
  return m;
}

Eigen::VectorXd condition_values(const TrajectoryDataset& tds) {
  Eigen::VectorXd c(tds.size());
  for (int i = 0; i < tds.size(); ++i) c(i) = tds.trajectories[i].condition_value();
  return c;
}

Trajectory trajectory_from_model(const Eigen::VectorXd& flat, const OfflineDataset& ds, int H) {
  const int d = ds.dim(), W = d + 1;
  if (flat.size() != H * W) throw std::invalid_argument("trajectory_from_model: size mismatch");
  Trajectory traj;
  traj.designs.resize(d, H);
  traj.raw_scores.resize(H);
  traj.norm_scores.resize(H);
  traj.source_rows.assign(H, -1);
  for (int h = 0; h < H; ++h) {
    traj.designs.col(h) = ds.unscale_design(flat.segment(h * W, d));
    traj.norm_scores(h) = flat(h * W + d);
    traj.raw_scores(h) = ds.denormalize_score(flat(h * W + d));
  }
  return traj;
}

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json j;
  auto designs = nlohmann::json::array();
  for (int h = 0; h < t.length(); ++h) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < t.dim(); ++k) row.push_back(t.designs(k, h));
    designs.push_back(std::move(row));
  }
  j["designs"] = std::move(designs);
  j["raw_scores"] = std::vector<double>(t.raw_scores.data(), t.raw_scores.data() + t.length());
  j["normalized_scores"] =
      std::vector<double>(t.norm_scores.data(), t.norm_scores.data() + t.length());
  j["source_rows"] = t.source_rows;
  return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  const auto& jd = j.at("designs");
  const auto H = static_cast<int>(jd.size());
  const auto d = static_cast<int>(jd.at(0).size());
  Trajectory t;
  t.designs.resize(d, H);
  t.raw_scores.resize(H);
  t.norm_scores.resize(H);
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < d; ++k) t.designs(k, h) = jd.at(h).at(k).get<double>();
    t.raw_scores(h) = j.at("raw_scores").at(h).get<double>();
    t.norm_scores(h) = j.at("normalized_scores").at(h).get<double>();
  }
  if (j.contains("source_rows"))
    t.source_rows = j["source_rows"].get<std::vector<int>>();
  else
    t.source_rows.assign(H, -1);
  return t;
}

void save_trajectories(const TrajectoryDataset& tds, const std::filesystem::path& path) {
  nlohmann::json j;
  j["config"] = {{"p", tds.config.p},
                 {"H", tds.config.H},
                 {"n_traj", tds.config.n_traj},
                 {"K", tds.config.K},
                 {"epsilon", tds.config.epsilon}};
  j["fallback_steps"] = tds.fallback_steps;
  auto arr = nlohmann::json::array();
  for (const auto& t : tds.trajectories) arr.push_back(trajectory_to_json(t));
  j["trajectories"] = std::move(arr);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("trajectories: cannot write " + path.string());
  out << j.dump(1) << "\n";
}

TrajectoryDataset load_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trajectories: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  TrajectoryDataset tds;
  const auto& jc = j.at("config");
  tds.config.p = jc.at("p").get<double>();
  tds.config.H = jc.at("H").get<int>();
  tds.config.n_traj = jc.at("n_traj").get<int>();
  tds.config.K = jc.at("K").get<int>();
  tds.config.epsilon = jc.at("epsilon").get<double>();
  tds.fallback_steps = j.value("fallback_steps", std::int64_t{0});
  for (const auto& jt : j.at("trajectories")) tds.trajectories.push_back(trajectory_from_json(jt));
  return tds;
}

}  // namespace gtg
