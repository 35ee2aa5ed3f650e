// Test-only oracles, independent of the library implementations they check:
// brute-force BH and step-up scans, union-find component counting,
// Kolmogorov-Smirnov statistics, quadrature.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace oracle {

// BH by direct O(M^2) scan: a p-value is a feasible threshold iff it is at
// most alpha * (#p-values below it) / M; reject everything at or below the
// largest feasible threshold.
inline std::vector<std::uint8_t> bh_brute_force(const std::vector<double>& pvals, double alpha) {
  const std::size_t m_count = pvals.size();
  double threshold = 0.0;
  for (std::size_t j = 0; j < m_count; ++j) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < m_count; ++i)
      if (pvals[i] <= pvals[j]) ++count;
    const double rung = alpha * static_cast<double>(count) / static_cast<double>(m_count);
    if (pvals[j] <= rung) threshold = std::max(threshold, pvals[j]);
  }
  std::vector<std::uint8_t> mask(m_count, 0);
  if (threshold > 0.0)
    for (std::size_t i = 0; i < m_count; ++i) mask[i] = pvals[i] <= threshold ? 1 : 0;
  return mask;
}

// Step-up oracle: scan eta over every observed lfdr value, keep the largest
// whose rejected-set mean lfdr stays at or below alpha (evaluated as
// sum(lfdr - alpha) <= 0 over the rejected set).
inline std::pair<std::optional<double>, std::vector<std::uint8_t>> step_up_brute_force(
    const std::vector<double>& lfdrs, double alpha) {
  std::optional<double> best;
  for (double eta : lfdrs) {
    double excess = 0.0;
    for (double v : lfdrs)
      if (v <= eta) excess += v - alpha;
    if (excess <= 0.0 && (!best || eta > *best)) best = eta;
  }
  std::vector<std::uint8_t> mask(lfdrs.size(), 0);
  if (best)
    for (std::size_t i = 0; i < lfdrs.size(); ++i) mask[i] = lfdrs[i] <= *best ? 1 : 0;
  return {best, mask};
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }
  int n_components() {
    int count = 0;
    for (int i = 0; i < static_cast<int>(parent_.size()); ++i)
      if (find(i) == i) ++count;
    return count;
  }

 private:
  std::vector<int> parent_;
};

// One-sample Kolmogorov-Smirnov distance against a CDF.
inline double ks_statistic(std::vector<double> values, const std::function<double(double)>& cdf) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    dist = std::max(dist, std::abs(f - static_cast<double>(i) / n));
    dist = std::max(dist, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return dist;
}

// Asymptotic KS critical value: D_crit = sqrt(-ln(level/2)/2) / sqrt(n).
inline double ks_critical(double level, std::size_t n) {
  return std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(static_cast<double>(n));
}

// Composite midpoint quadrature on [a,b].
inline double midpoint_quadrature(const std::function<double(double)>& f, double a, double b,
                                  int nodes) {
  const double h = (b - a) / nodes;
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) acc += f(a + (i + 0.5) * h);
  return acc * h;
}

// Quadrature of integral_0^1 f(p) dp for integrands with a power singularity
// at 0: substitute p = e^x and apply the midpoint rule on x in [-span, 0].
inline double unit_interval_log_quadrature(const std::function<double(double)>& f, int nodes,
                                           double span = 700.0) {
  const double h = span / nodes;
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = -span + (i + 0.5) * h;
    const double p = std::exp(x);
    acc += f(p) * p;
  }
  return acc * h;
}

// Central finite differences of a scalar function of a matrix argument.
inline Eigen::MatrixXd finite_difference_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& at,
    double step = 1e-6) {
  Eigen::MatrixXd grad(at.rows(), at.cols());
  Eigen::MatrixXd x = at;
  for (int r = 0; r < at.rows(); ++r) {
    for (int c = 0; c < at.cols(); ++c) {
      const double keep = x(r, c);
      x(r, c) = keep + step;
      const double hi = f(x);
      x(r, c) = keep - step;
      const double lo = f(x);
      x(r, c) = keep;
      grad(r, c) = (hi - lo) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace oracle
