// SPDX-License-Identifier: Apache-2.0
//
// Gray-mapped square constellations with unit average energy and max-log
// soft demapping. BPSK maps bit 0 -> +1. For QAM the first half of each
// label drives the in-phase PAM axis and the second half the quadrature axis;
// on each axis the all-zero label sits on the most positive level.
#pragma once

#include "mulink/phy/mcs.hpp"
#include "mulink/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

namespace detail {

struct PamAxis {
  int bits = 1;
  int levels = 2;
  double scale = 1.0;
  std::array<double, 16> amplitude{};       // by Gray label
  std::array<double, 16> level_amplitude{};  // by level index
  std::array<unsigned, 16> level_label{};    // Gray label of level index i
};

inline PamAxis make_axis(Modulation mod) {
  PamAxis a;
  const int m = bits_per_symbol(mod);
  a.bits = mod == Modulation::Bpsk ? 1 : m / 2;
  a.levels = 1 << a.bits;
  if (mod == Modulation::Bpsk) {
    a.scale = 1.0;
  } else {
    const double ma = a.levels;
    a.scale = 1.0 / std::sqrt(2.0 * (ma * ma - 1.0) / 3.0);
  }
  for (int i = 0; i < a.levels; ++i) {
    const unsigned gray = static_cast<unsigned>(i) ^ (static_cast<unsigned>(i) >> 1);
    const double amp = a.scale * (a.levels - 1 - 2 * i);
    a.level_amplitude[static_cast<std::size_t>(i)] = amp;
    a.level_label[static_cast<std::size_t>(i)] = gray;
    a.amplitude[gray] = amp;
  }
  return a;
}

inline const PamAxis& axis(Modulation mod) {
  static const std::array<PamAxis, 5> axes{make_axis(Modulation::Bpsk), make_axis(Modulation::Qpsk),
                                           make_axis(Modulation::Qam16), make_axis(Modulation::Qam64),
                                           make_axis(Modulation::Qam256)};
  return axes[static_cast<std::size_t>(mod)];
}

inline unsigned read_label(const std::uint8_t* bits, int n) {
  unsigned v = 0;
  for (int i = 0; i < n; ++i) v = (v << 1) | (bits[i] & 1U);
  return v;
}

// Max-log LLRs of the `bits` labels on one PAM axis.
inline void axis_llrs(const PamAxis& a, double y, double snr, float* out) {
  std::array<double, 16> d{};
  for (int i = 0; i < a.levels; ++i) {
    const double e = y - a.level_amplitude[static_cast<std::size_t>(i)];
    d[static_cast<std::size_t>(i)] = e * e;
  }
  for (int b = 0; b < a.bits; ++b) {
    const unsigned mask = 1U << (a.bits - 1 - b);
    double d0 = std::numeric_limits<double>::infinity();
    double d1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.levels; ++i) {
      if (a.level_label[static_cast<std::size_t>(i)] & mask)
        d1 = std::min(d1, d[static_cast<std::size_t>(i)]);
      else
        d0 = std::min(d0, d[static_cast<std::size_t>(i)]);
    }
    out[b] = static_cast<float>(snr * (d1 - d0));
  }
}

}  // namespace detail

inline cplx map_symbol(const std::uint8_t* bits, Modulation mod) {
  const auto& a = detail::axis(mod);
  if (mod == Modulation::Bpsk) return {a.amplitude[bits[0] & 1U], 0.0};
  const double re = a.amplitude[detail::read_label(bits, a.bits)];
  const double im = a.amplitude[detail::read_label(bits + a.bits, a.bits)];
  return {re, im};
}

inline std::vector<cplx> map_symbols(std::span<const std::uint8_t> bits, Modulation mod) {
  const auto m = static_cast<std::size_t>(bits_per_symbol(mod));
  if (bits.size() % m != 0) throw std::invalid_argument("bit count not divisible by bits per symbol");
  std::vector<cplx> out(bits.size() / m);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = map_symbol(bits.data() + s * m, mod);
  return out;
}

// All 2^m points indexed by their label (first bit most significant).
inline std::vector<cplx> constellation(Modulation mod) {
  const int m = bits_per_symbol(mod);
  std::vector<cplx> pts(static_cast<std::size_t>(1) << m);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
  for (std::size_t label = 0; label < pts.size(); ++label) {
    for (int b = 0; b < m; ++b) bits[static_cast<std::size_t>(b)] = (label >> (m - 1 - b)) & 1U;
    pts[label] = map_symbol(bits.data(), mod);
  }
  return pts;
}

// y = s + n with n ~ CN(0, 1/snr); writes bits_per_symbol LLRs to out.
inline void symbol_llrs(cplx y, double snr, Modulation mod, float* out) {
  const auto& a = detail::axis(mod);
  detail::axis_llrs(a, y.real(), snr, out);
  if (mod != Modulation::Bpsk) detail::axis_llrs(a, y.imag(), snr, out + a.bits);
}

inline std::vector<float> llr(std::span<const cplx> received, std::span<const double> snr, Modulation mod) {
  if (received.size() != snr.size()) throw std::invalid_argument("symbol/SNR length mismatch");
  const auto m = static_cast<std::size_t>(bits_per_symbol(mod));
  std::vector<float> out(received.size() * m);
  for (std::size_t s = 0; s < received.size(); ++s) symbol_llrs(received[s], snr[s], mod, out.data() + s * m);
  return out;
}

}  // namespace mulink
