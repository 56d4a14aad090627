#include "gtg/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gtg {

Eigen::VectorXd OfflineDataset::scale_design(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u(x.size());
  for (int k = 0; k < x.size(); ++k) {
    const double span = x_hi(k) - x_lo(k);
    u(k) = span > 0.0 ? 2.0 * (x(k) - x_lo(k)) / span - 1.0 : 0.0;
  }
  return u;
}

Eigen::VectorXd OfflineDataset::unscale_design(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x(u.size());
  for (int k = 0; k < u.size(); ++k) {
    const double span = x_hi(k) - x_lo(k);
    x(k) = span > 0.0 ? x_lo(k) + (u(k) + 1.0) * 0.5 * span : x_lo(k);
  }
  return x;
}

OfflineDataset make_dataset(Eigen::MatrixXd designs, Eigen::VectorXd scores, SpaceKind space) {
  if (designs.cols() != scores.size())
    throw std::invalid_argument("dataset: designs and scores lengths differ");
  if (designs.cols() < 1) throw std::invalid_argument("dataset: empty");
  OfflineDataset ds;
  ds.designs = std::move(designs);
  ds.scores = std::move(scores);
  ds.space = space;
  ds.x_lo = ds.designs.rowwise().minCoeff();
  ds.x_hi = ds.designs.rowwise().maxCoeff();
  ds.y_min = ds.scores.minCoeff();
  ds.y_max = ds.scores.maxCoeff();
  if (!(ds.y_min < ds.y_max))
    throw std::invalid_argument("dataset: constant scores (y_min == y_max)");
  return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

OfflineDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset: empty file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "y")
    throw std::invalid_argument("dataset: expected header x0,...,x{d-1},y in " + path.string());
  const int d = static_cast<int>(header.size()) - 1;

  std::vector<double> xs, ys;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + 1)
      throw std::invalid_argument("dataset: row " + std::to_string(row) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(d + 1));
    for (int k = 0; k <= d; ++k) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(fields[k], &pos);
        if (pos != fields[k].size()) throw std::invalid_argument("trailing chars");
        (k < d ? xs : ys).push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("dataset: malformed value in row " + std::to_string(row) +
                                    ", column " + std::to_string(k));
      }
    }
  }
  const auto n = static_cast<int>(ys.size());
  if (n < 1) throw std::invalid_argument("dataset: no data rows in " + path.string());
  Eigen::MatrixXd designs(d, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) designs(k, i) = xs[static_cast<std::size_t>(i) * d + k];
  return make_dataset(std::move(designs), Eigen::Map<Eigen::VectorXd>(ys.data(), n));
}

OfflineDataset load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset: cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  if (!j.contains("designs") || !j.contains("scores"))
    throw std::invalid_argument("dataset: JSON missing designs/scores in " + path.string());
  const auto& jd = j["designs"];
  const auto& js = j["scores"];
  const auto n = static_cast<int>(jd.size());
  if (n < 1) throw std::invalid_argument("dataset: no data rows in " + path.string());
  if (static_cast<int>(js.size()) != n)
    throw std::invalid_argument("dataset: designs and scores lengths differ");
  const auto d = static_cast<int>(jd.at(0).size());
  Eigen::MatrixXd designs(d, n);
  Eigen::VectorXd scores(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(jd.at(i).size()) != d)
      throw std::invalid_argument("dataset: inconsistent dimensionality at row " + std::to_string(i));
    for (int k = 0; k < d; ++k) designs(k, i) = jd.at(i).at(k).get<double>();
    scores(i) = js.at(i).get<double>();
  }
  SpaceKind space = SpaceKind::continuous;
  if (j.contains("space")) {
    const auto s = j["space"].get<std::string>();
    if (s == "discrete")
      space = SpaceKind::discrete;
    else if (s != "continuous")
      throw std::invalid_argument("dataset: unknown space kind '" + s + "'");
  }
  return make_dataset(std::move(designs), std::move(scores), space);
}

}  // namespace

OfflineDataset load_dataset(const std::filesystem::path& path, FileFormat format) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("dataset: file not found: " + path.string());
  return format == FileFormat::csv ? load_csv(path) : load_json(path);
}

void save_dataset(const OfflineDataset& ds, const std::filesystem::path& path, FileFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dataset: cannot write " + path.string());
  if (format == FileFormat::csv) {
    for (int k = 0; k < ds.dim(); ++k) out << "x" << k << ",";
    out << "y\n";
    out.precision(17);
    for (int i = 0; i < ds.size(); ++i) {
      for (int k = 0; k < ds.dim(); ++k) out << ds.designs(k, i) << ",";
      out << ds.scores(i) << "\n";
    }
  } else {
    nlohmann::json j;
    j["space"] = ds.space == SpaceKind::discrete ? "discrete" : "continuous";
    auto designs = nlohmann::json::array();
    auto scores = nlohmann::json::array();
    for (int i = 0; i < ds.size(); ++i) {
      auto row = nlohmann::json::array();
      for (int k = 0; k < ds.dim(); ++k) row.push_back(ds.designs(k, i));
      designs.push_back(std::move(row));
      scores.push_back(ds.scores(i));
    }
    j["designs"] = std::move(designs);
    j["scores"] = std::move(scores);
    out << j.dump(1) << "\n";
  }
}

double design_distance(const OfflineDataset& ds, int i, int j) {
  if (ds.space == SpaceKind::discrete) {
    double count = 0.0;
    for (int k = 0; k < ds.dim(); ++k)
      if (ds.designs(k, i) != ds.designs(k, j)) count += 1.0;
    return count;
  }
  return (ds.designs.col(i) - ds.designs.col(j)).norm();
}

NeighborIndex NeighborIndex::build(const OfflineDataset& ds, bool precompute) {
  const auto t0 = std::chrono::steady_clock::now();
  NeighborIndex idx;
  idx.n_ = ds.size();
  idx.precompute_ = precompute;
  if (precompute) {
    idx.distances_.resize(idx.n_, idx.n_);
    for (int i = 0; i < idx.n_; ++i) {
      idx.distances_(i, i) = 0.0;
      for (int j = i + 1; j < idx.n_; ++j) {
        const double dist = design_distance(ds, i, j);
        idx.distances_(i, j) = dist;
        idx.distances_(j, i) = dist;
      }
    }
    idx.order_.resize(idx.n_);
    for (int i = 0; i < idx.n_; ++i) {
      auto& row = idx.order_[i];
      row.reserve(idx.n_ - 1);
      for (int j = 0; j < idx.n_; ++j)
        if (j != i) row.push_back(j);
      std::sort(row.begin(), row.end(), [&](int a, int b) {
        const double da = idx.distances_(i, a), db = idx.distances_(i, b);
        return da < db || (da == db && a < b);
      });
    }
  }
  idx.build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return idx;
}

double NeighborIndex::distance(const OfflineDataset& ds, int i, int j) const {
  return precompute_ ? distances_(i, j) : design_distance(ds, i, j);
}

std::vector<int> NeighborIndex::ordered_neighbors(const OfflineDataset& ds, int center) const {
  if (precompute_) return order_[center];
  std::vector<double> dist(n_);
  for (int j = 0; j < n_; ++j) dist[j] = design_distance(ds, center, j);
  std::vector<int> row;
  row.reserve(n_ - 1);
  for (int j = 0; j < n_; ++j)
    if (j != center) row.push_back(j);
  std::sort(row.begin(), row.end(),
            [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  return row;
}

std::vector<int> NeighborIndex::knn_above_threshold(const OfflineDataset& ds, int center, int K,
                                                    double threshold) const {
  if (K < 1) throw std::invalid_argument("knn: K must be >= 1");
  if (center < 0 || center >= n_) throw std::invalid_argument("knn: center out of range");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(K));
  for (int j : ordered_neighbors(ds, center)) {
    if (ds.scores(j) > threshold) {
      out.push_back(j);
      if (static_cast<int>(out.size()) == K) break;
    }
  }
  return out;
}

double percentile_score(const OfflineDataset& ds, double p) {
  if (!(p > 0.0 && p <= 100.0))
    throw std::invalid_argument("percentile: p must be in (0,100]");
  std::vector<double> sorted(ds.scores.data(), ds.scores.data() + ds.size());
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * sorted.size()));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

int sample_low_percentile(const OfflineDataset& ds, double p, Rng& rng) {
  const double cutoff = percentile_score(ds, p);
  std::vector<int> eligible;
  for (int i = 0; i < ds.size(); ++i)
    if (ds.scores(i) <= cutoff) eligible.push_back(i);
  return eligible[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(eligible.size()) - 1))];
}

}  // namespace gtg
