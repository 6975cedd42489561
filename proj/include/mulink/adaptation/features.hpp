// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mulink/snr_grid.hpp"
#include "mulink/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

inline constexpr int kDefaultFeatureCount = 4;

// All L*N values in ascending order, in dB.
inline std::vector<double> ordered_snr_db(const SnrGrid& grid) {
  grid.validate();
  std::vector<double> v(grid.values.size());
  std::transform(grid.values.begin(), grid.values.end(), v.begin(), linear_to_db);
  std::sort(v.begin(), v.end());
  return v;
}

// d equispaced order statistics of an ascending sequence (min and max included).
inline std::vector<double> order_statistics(std::span<const double> sorted, int d) {
  if (sorted.empty()) throw std::invalid_argument("empty SNR vector");
  if (d < 2 || d > static_cast<int>(sorted.size())) throw std::invalid_argument("need 2 <= d <= L*N");
  const double span = static_cast<double>(sorted.size() - 1);
  std::vector<double> f(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const auto idx = static_cast<std::size_t>(std::lround(k * span / (d - 1)));
    f[static_cast<std::size_t>(k)] = sorted[idx];
  }
  return f;
}

inline std::vector<double> order_stats_features(const SnrGrid& grid, int d = kDefaultFeatureCount) {
  const std::vector<double> sorted = ordered_snr_db(grid);
  return order_statistics(sorted, d);
}

}  // namespace mulink
