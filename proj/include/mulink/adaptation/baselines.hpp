// SPDX-License-Identifier: Apache-2.0
//
// Scalar-metric threshold classifiers: mean SNR and exponential effective SNR.
#pragma once

#include "mulink/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

// Predict +1 iff metric >= threshold.
struct ThresholdRule {
  double threshold = 0.0;
  long training_errors = 0;

  int predict(double metric) const { return metric >= threshold ? 1 : -1; }
};

// Candidate thresholds: every distinct value, every midpoint between
// consecutive distinct values, and one past the maximum. The first candidate
// (smallest threshold) wins ties.
inline ThresholdRule fit_threshold(std::span<const double> metric, std::span<const int> y) {
  if (metric.size() != y.size() || metric.empty()) throw std::invalid_argument("need one label per metric value");
  std::vector<std::size_t> order(metric.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return metric[a] < metric[b]; });

  const long total_neg = std::count(y.begin(), y.end(), -1);
  // Threshold at sorted position p: samples [0, p) predicted -1, [p, n) +1.
  ThresholdRule best;
  best.training_errors = std::numeric_limits<long>::max();
  long neg_below = 0;
  long pos_below = 0;
  auto consider = [&](double th) {
    const long errors = pos_below + (total_neg - neg_below);
    if (errors < best.training_errors) best = {th, errors};
  };
  std::size_t p = 0;
  while (p < order.size()) {
    const double v = metric[order[p]];
    consider(v);
    while (p < order.size() && metric[order[p]] == v) {
      if (y[order[p]] > 0) ++pos_below; else ++neg_below;
      ++p;
    }
    if (p < order.size()) consider(0.5 * (v + metric[order[p]]));
  }
  consider(metric[order.back()] + 1.0);
  return best;
}

inline double mean_snr(std::span<const double> linear) {
  if (linear.empty()) throw std::invalid_argument("empty SNR vector");
  return std::accumulate(linear.begin(), linear.end(), 0.0) / static_cast<double>(linear.size());
}

// gamma_eff = -(1/beta) ln(mean(exp(-beta gamma))), shifted by the minimum.
inline double eff_snr(std::span<const double> linear, double beta) {
  if (linear.empty()) throw std::invalid_argument("empty SNR vector");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  const double m = *std::min_element(linear.begin(), linear.end());
  double s = 0.0;
  for (double g : linear) s += std::exp(-beta * (g - m));
  return m - std::log(s / static_cast<double>(linear.size())) / beta;
}

inline std::vector<double> default_beta_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 50; ++i) g.push_back(std::pow(10.0, -3.0 + 5.0 * i / 50.0));
  return g;
}

struct EffSnrRule {
  double beta = 1.0;
  ThresholdRule rule;

  int predict(std::span<const double> linear) const { return rule.predict(eff_snr(linear, beta)); }
};

inline ThresholdRule fit_avg_snr(std::span<const std::vector<double>> linear, std::span<const int> y) {
  std::vector<double> m;
  m.reserve(linear.size());
  for (const auto& g : linear) m.push_back(mean_snr(g));
  return fit_threshold(m, y);
}

// Smallest beta wins ties.
inline EffSnrRule fit_eff_snr(std::span<const std::vector<double>> linear, std::span<const int> y,
                              std::span<const double> beta_grid) {
  if (beta_grid.empty()) throw std::invalid_argument("empty beta grid");
  EffSnrRule best;
  best.rule.training_errors = std::numeric_limits<long>::max();
  std::vector<double> m(linear.size());
  for (double beta : beta_grid) {
    for (std::size_t i = 0; i < linear.size(); ++i) m[i] = eff_snr(linear[i], beta);
    const ThresholdRule r = fit_threshold(m, y);
    if (r.training_errors < best.rule.training_errors) best = {beta, r};
  }
  return best;
}

}  // namespace mulink
