#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gtg {

double mean(std::span<const double> xs);
double stddev(std::span<const double> xs);  // sample std (n-1); 0 for n < 2

// Nearest-rank percentile: the value at rank ceil(p/100 * n) of the sorted
// sample, p in (0, 100].
double percentile_nearest_rank(std::span<const double> xs, double p);

// Quantile points at 0,10,...,100 (nearest-rank except the 0th = min).
Eigen::VectorXd deciles(std::span<const double> xs);

struct Histogram {
  std::vector<double> bin_lo, bin_hi;
  std::vector<std::int64_t> count;
};

// Equal-width bins over [min, max] of the data; the last bin is closed above
// so counts always sum to xs.size(). Empty input yields an empty histogram.
Histogram histogram(std::span<const double> xs, int bins);

// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> a, std::span<const double> b);

// Two-sided Kolmogorov-Smirnov statistic of a sample against a continuous
// CDF evaluated by `cdf`.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// Asymptotic KS critical value at significance `alpha` for sample size n.
double ks_critical_value(double alpha, std::size_t n);

// FNV-1a 64-bit hash, hex-encoded. Stable across platforms and builds.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace gtg
