// SPDX-License-Identifier: Apache-2.0
//
// Frequency-selective MIMO channels: iid complex Gaussian tapped delay line,
// optional exponential power-delay profile and receive correlation, converted
// to one flat-fading matrix per OFDM carrier.
#pragma once

#include "mulink/rng.hpp"
#include "mulink/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mulink {

struct ChannelSpec {
  int num_tx_antennas = 4;
  std::vector<int> num_rx_antennas{2, 2, 2};
  int num_carriers = 52;
  std::vector<double> tap_power{0.25, 0.25, 0.25, 0.25};
  double noise_variance = 1.0;
  // Exponential receive correlation [R]_ij = rho^|i-j|; 0 gives iid antennas.
  double rx_correlation = 0.0;

  int num_users() const { return static_cast<int>(num_rx_antennas.size()); }
  int num_taps() const { return static_cast<int>(tap_power.size()); }
  double total_tap_power() const { return std::accumulate(tap_power.begin(), tap_power.end(), 0.0); }

  void validate() const {
    if (num_tx_antennas <= 0) throw std::invalid_argument("num_tx_antennas must be positive");
    if (num_rx_antennas.empty()) throw std::invalid_argument("at least one user is required");
    for (int n : num_rx_antennas)
      if (n <= 0) throw std::invalid_argument("receive antenna counts must be positive");
    if (num_carriers <= 0) throw std::invalid_argument("num_carriers must be positive");
    if (tap_power.empty()) throw std::invalid_argument("at least one tap is required");
    if (num_carriers < num_taps()) throw std::invalid_argument("num_carriers must be >= num_taps");
    for (double p : tap_power)
      if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("tap powers must be nonnegative");
    if (!(total_tap_power() > 0.0)) throw std::invalid_argument("tap powers must sum to a positive value");
    if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be positive");
    if (rx_correlation < 0.0 || rx_correlation >= 1.0)
      throw std::invalid_argument("rx_correlation must lie in [0, 1)");
  }
};

// Power profile decaying by decay_db per tap, normalized to total.
inline std::vector<double> exponential_tap_profile(int num_taps, double decay_db, double total = 1.0) {
  if (num_taps <= 0) throw std::invalid_argument("num_taps must be positive");
  std::vector<double> p(static_cast<std::size_t>(num_taps));
  for (int t = 0; t < num_taps; ++t) p[static_cast<std::size_t>(t)] = db_to_linear(-decay_db * t);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v *= total / s;
  return p;
}

inline std::vector<double> uniform_tap_profile(int num_taps, double total = 1.0) {
  return std::vector<double>(static_cast<std::size_t>(num_taps), total / num_taps);
}

using FrequencyResponse = std::vector<CMatrix>;  // one N_rx x N_tx matrix per carrier

struct ChannelRealization {
  std::vector<FrequencyResponse> users;

  int num_users() const { return static_cast<int>(users.size()); }
  int num_carriers() const { return users.empty() ? 0 : static_cast<int>(users.front().size()); }
};

namespace detail {

inline CMatrix correlation_sqrt(int n, double rho) {
  RMatrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = std::pow(rho, std::abs(i - j));
  Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
  RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  RMatrix s = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return s.cast<cplx>();
}

}  // namespace detail

// num_taps matrices of shape N_rx,u x N_tx; entries of tap t are iid CN(0, tap_power[t]).
inline std::vector<CMatrix> draw_taps(const ChannelSpec& spec, int user, Rng& rng) {
  spec.validate();
  if (user < 0 || user >= spec.num_users()) throw std::out_of_range("user index out of range");
  const int nrx = spec.num_rx_antennas[static_cast<std::size_t>(user)];
  const int ntx = spec.num_tx_antennas;
  std::vector<CMatrix> taps;
  taps.reserve(spec.tap_power.size());
  for (double p : spec.tap_power) {
    CMatrix t(nrx, ntx);
    for (int c = 0; c < ntx; ++c)
      for (int r = 0; r < nrx; ++r) t(r, c) = complex_gaussian(rng, p);
    taps.push_back(std::move(t));
  }
  if (spec.rx_correlation > 0.0 && nrx > 1) {
    const CMatrix s = detail::correlation_sqrt(nrx, spec.rx_correlation);
    for (CMatrix& t : taps) t = s * t;
  }
  return taps;
}

// H[n] = sum_t taps[t] exp(-j 2 pi n t / N).
inline FrequencyResponse taps_to_frequency(std::span<const CMatrix> taps, int num_carriers) {
  if (taps.empty()) throw std::invalid_argument("no taps");
  if (static_cast<int>(taps.size()) > num_carriers) throw std::invalid_argument("more taps than carriers");
  const auto rows = taps.front().rows();
  const auto cols = taps.front().cols();
  for (const CMatrix& t : taps)
    if (t.rows() != rows || t.cols() != cols) throw std::invalid_argument("tap dimension mismatch");

  FrequencyResponse h(static_cast<std::size_t>(num_carriers), CMatrix::Zero(rows, cols));
  for (int n = 0; n < num_carriers; ++n) {
    for (std::size_t t = 0; t < taps.size(); ++t) {
      // Reduce the phase index modulo N so large n*t stays exact.
      const long k = (static_cast<long>(n) * static_cast<long>(t)) % num_carriers;
      const double ang = -kTwoPi * static_cast<double>(k) / num_carriers;
      h[static_cast<std::size_t>(n)] += taps[t] * cplx(std::cos(ang), std::sin(ang));
    }
  }
  return h;
}

// Realization for one trial: user u draws from derive_seed(master, {Channel, trial, u}).
inline ChannelRealization draw_channel(const ChannelSpec& spec, std::uint64_t master_seed, std::uint64_t trial) {
  spec.validate();
  ChannelRealization out;
  out.users.reserve(static_cast<std::size_t>(spec.num_users()));
  for (int u = 0; u < spec.num_users(); ++u) {
    Rng rng(derive_seed(master_seed, {tag(Stream::Channel), trial, static_cast<std::uint64_t>(u)}));
    const auto taps = draw_taps(spec, u, rng);
    out.users.push_back(taps_to_frequency(taps, spec.num_carriers));
  }
  return out;
}

}  // namespace mulink
