#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gtg/dataset.hpp"

using namespace gtg;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "gtg_dataset_tests";
  fs::create_directories(dir);
  return dir / name;
}

OfflineDataset random_dataset(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd designs(d, n);
  Eigen::VectorXd scores(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) designs(k, i) = rng.uniform(-10.0, 10.0);
    scores(i) = rng.uniform(-5.0, 5.0);
  }
  return make_dataset(std::move(designs), std::move(scores));
}

// Brute-force reference: filter by score, sort by (distance, index), truncate.
std::vector<int> knn_oracle(const OfflineDataset& ds, int center, int K, double threshold) {
  std::vector<int> idx;
  for (int j = 0; j < ds.size(); ++j)
    if (j != center && ds.scores(j) > threshold) idx.push_back(j);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double da = design_distance(ds, center, a), db = design_distance(ds, center, b);
    return da < db || (da == db && a < b);
  });
  if (static_cast<int>(idx.size()) > K) idx.resize(static_cast<std::size_t>(K));
  return idx;
}

}  // namespace

TEST_CASE("csv load reads back a 2-row file") {
  const auto path = temp_file("two_rows.csv");
  std::ofstream(path) << "x0,x1,y\n0,0,1.0\n1,1,3.0\n";
  const auto ds = load_dataset(path, FileFormat::csv);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.y_min == doctest::Approx(1.0));
  CHECK(ds.y_max == doctest::Approx(3.0));
  CHECK(ds.designs(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("single-row file is rejected as constant scores") {
  const auto path = temp_file("one_row.csv");
  std::ofstream(path) << "x0,y\n0.5,2.0\n";
  CHECK_THROWS_WITH_AS(load_dataset(path, FileFormat::csv),
                       doctest::Contains("constant scores"), std::invalid_argument);
}

TEST_CASE("malformed rows are reported with their index") {
  const auto path = temp_file("bad_row.csv");
  std::ofstream(path) << "x0,y\n1,2\nbroken,3\n";
  CHECK_THROWS_WITH_AS(load_dataset(path, FileFormat::csv), doctest::Contains("row 2"),
                       std::invalid_argument);

  const auto path2 = temp_file("bad_width.csv");
  std::ofstream(path2) << "x0,y\n1,2\n1,2,3\n";
  CHECK_THROWS_AS(load_dataset(path2, FileFormat::csv), std::invalid_argument);
}

TEST_CASE("json round-trip preserves values and space kind") {
  auto ds = random_dataset(37, 3, 11);
  ds.space = SpaceKind::discrete;
  const auto path = temp_file("roundtrip.json");
  save_dataset(ds, path, FileFormat::json);
  const auto back = load_dataset(path, FileFormat::json);
  CHECK(back.space == SpaceKind::discrete);
  CHECK(back.designs == ds.designs);
  CHECK(back.scores == ds.scores);
}

TEST_CASE("score normalization bounds, midpoint, and round-trip") {
  Eigen::MatrixXd designs(1, 2);
  designs << 0.0, 1.0;
  Eigen::VectorXd scores(2);
  scores << 1.0, 3.0;
  const auto ds = make_dataset(std::move(designs), std::move(scores));
  CHECK(ds.normalize_score(ds.y_min) == 0.0);
  CHECK(ds.normalize_score(ds.y_max) == 1.0);
  CHECK(ds.normalize_score(2.0) == doctest::Approx(0.5));

  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double y = rng.uniform(-100.0, 100.0);
    const double back = ds.denormalize_score(ds.normalize_score(y));
    CHECK(std::abs(back - y) <= 1e-12 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("design scaling maps the data box onto [-1,1] and back") {
  const auto ds = random_dataset(64, 4, 3);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int row = static_cast<int>(rng.uniform_int(0, ds.size() - 1));
    const Eigen::VectorXd u = ds.scale_design(ds.designs.col(row));
    CHECK(u.minCoeff() >= -1.0 - 1e-12);
    CHECK(u.maxCoeff() <= 1.0 + 1e-12);
    const Eigen::VectorXd back = ds.unscale_design(u);
    CHECK((back - ds.designs.col(row)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("percentile sampling stays below the brute-force percentile value") {
  Eigen::MatrixXd designs(1, 100);
  Eigen::VectorXd scores(100);
  for (int i = 0; i < 100; ++i) {
    designs(0, i) = i;
    scores(i) = i + 1;  // scores 1..100
  }
  const auto ds = make_dataset(std::move(designs), std::move(scores));

  // brute-force oracle: sort and take the nearest-rank cutoff
  std::vector<double> sorted(ds.scores.data(), ds.scores.data() + 100);
  std::sort(sorted.begin(), sorted.end());
  const double cutoff20 = sorted[static_cast<std::size_t>(std::ceil(0.20 * 100)) - 1];
  CHECK(cutoff20 == 20.0);

  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const int row = sample_low_percentile(ds, 20.0, rng);
    CHECK(ds.scores(row) <= cutoff20);
  }

  // p = 100 makes every element eligible; verify both tails get hit
  bool low = false, high = false;
  for (int i = 0; i < 2000; ++i) {
    const int row = sample_low_percentile(ds, 100.0, rng);
    low |= ds.scores(row) <= 10;
    high |= ds.scores(row) > 90;
  }
  CHECK(low);
  CHECK(high);

  CHECK_THROWS_AS(sample_low_percentile(ds, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_low_percentile(ds, 101.0, rng), std::invalid_argument);
}

TEST_CASE("knn matches the brute-force oracle on randomized queries") {
  const auto ds = random_dataset(50, 2, 21);
  const auto idx = NeighborIndex::build(ds);

  std::vector<double> sorted(ds.scores.data(), ds.scores.data() + ds.size());
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[24];

  CHECK(idx.knn_above_threshold(ds, 7, 5, median) == knn_oracle(ds, 7, 5, median));

  Rng rng(99);
  const auto big = random_dataset(120, 3, 22);
  const auto big_idx = NeighborIndex::build(big);
  for (int q = 0; q < 200; ++q) {
    const int center = static_cast<int>(rng.uniform_int(0, big.size() - 1));
    const int K = static_cast<int>(rng.uniform_int(1, 15));
    const double thr = rng.uniform(-6.0, 6.0);
    CHECK(big_idx.knn_above_threshold(big, center, K, thr) == knn_oracle(big, center, K, thr));
  }
}

TEST_CASE("knn edge cases: unconstrained, no qualifiers, tie-breaking") {
  const auto ds = random_dataset(30, 2, 31);
  const auto idx = NeighborIndex::build(ds);
  const double neg_inf = -std::numeric_limits<double>::infinity();

  const auto all = idx.knn_above_threshold(ds, 4, ds.size() - 1, neg_inf);
  CHECK(static_cast<int>(all.size()) == ds.size() - 1);
  for (std::size_t i = 1; i < all.size(); ++i)
    CHECK(design_distance(ds, 4, all[i - 1]) <= design_distance(ds, 4, all[i]));

  CHECK(idx.knn_above_threshold(ds, 4, 5, ds.y_max).empty());

  // tied distances resolve toward the smaller index: a 1-d lattice with
  // duplicated offsets
  Eigen::MatrixXd designs(1, 5);
  designs << 0.0, 1.0, -1.0, 1.0, 2.0;
  Eigen::VectorXd scores(5);
  scores << 0.0, 1.0, 2.0, 3.0, 4.0;
  const auto tied = make_dataset(std::move(designs), std::move(scores));
  const auto tidx = NeighborIndex::build(tied);
  const auto nn = tidx.knn_above_threshold(tied, 0, 3, neg_inf);
  CHECK(nn == std::vector<int>{1, 2, 3});
}

TEST_CASE("on-the-fly mode answers exactly like the precomputed matrix") {
  const auto ds = random_dataset(80, 2, 41);
  const auto dense = NeighborIndex::build(ds, true);
  const auto lazy = NeighborIndex::build(ds, false);
  CHECK(dense.precomputed());
  CHECK_FALSE(lazy.precomputed());
  CHECK(dense.build_seconds() >= 0.0);
  Rng rng(5);
  for (int q = 0; q < 50; ++q) {
    const int center = static_cast<int>(rng.uniform_int(0, ds.size() - 1));
    const int K = static_cast<int>(rng.uniform_int(1, 10));
    const double thr = rng.uniform(-5.0, 5.0);
    CHECK(dense.knn_above_threshold(ds, center, K, thr) ==
          lazy.knn_above_threshold(ds, center, K, thr));
  }
}

TEST_CASE("discrete spaces use hamming distance") {
  Eigen::MatrixXd designs(3, 3);
  designs.col(0) << 0, 1, 2;
  designs.col(1) << 0, 1, 3;  // differs in one coordinate
  designs.col(2) << 1, 0, 3;  // differs in all three
  Eigen::VectorXd scores(3);
  scores << 0.0, 1.0, 2.0;
  const auto ds = make_dataset(std::move(designs), std::move(scores), SpaceKind::discrete);
  CHECK(design_distance(ds, 0, 1) == 1.0);
  CHECK(design_distance(ds, 0, 2) == 3.0);
  CHECK(design_distance(ds, 1, 2) == 2.0);
}
