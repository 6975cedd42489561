// SPDX-License-Identifier: Apache-2.0
//
// Coded BICM-OFDM link simulation driven by a post-processing SNR grid.
// Each coded symbol at (stream l, carrier n) passes through an independent
// AWGN channel whose SNR is grid(l, n); equalization is assumed ideal, so the
// grid is the only link-quality input.
#pragma once

#include "mulink/phy/convolutional.hpp"
#include "mulink/phy/interleaver.hpp"
#include "mulink/phy/mcs.hpp"
#include "mulink/phy/modulation.hpp"
#include "mulink/rng.hpp"
#include "mulink/snr_grid.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace mulink {

inline constexpr int kDefaultFrameBytes = 128;

struct FerMeasurement {
  int mcs = kNoTransmission;
  int streams = 0;
  int frames_simulated = 0;
  int frames_in_error = 0;
  double fer = 0.0;
};

// One frame through encode -> interleave -> map -> AWGN -> LLR -> deinterleave
// -> decode. `il` is the per-stream block interleaver of carriers * bps bits.
// Returns true if any payload bit is wrong.
inline bool simulate_frame(const SnrGrid& grid, const McsEntry& mcs, const BlockInterleaver& il, int frame_bytes,
                           Rng& rng) {
  const Modulation mod = mcs.modulation;
  const auto m = static_cast<std::size_t>(bits_per_symbol(mod));
  const std::size_t k = static_cast<std::size_t>(frame_bytes) * 8;

  std::vector<std::uint8_t> payload(k);
  for (std::size_t i = 0; i < k; i += 64) {
    const std::uint64_t w = rng();
    for (std::size_t b = 0; b < 64 && i + b < k; ++b) payload[i + b] = static_cast<std::uint8_t>((w >> b) & 1U);
  }

  std::vector<std::uint8_t> coded = convolutional_encode(payload, mcs.code_rate);
  const std::size_t codeword = coded.size();
  const std::size_t sym_bits = ofdm_symbol_bits(mod, grid.streams, grid.carriers);
  const std::size_t padded = ((codeword + sym_bits - 1) / sym_bits) * sym_bits;
  coded.resize(padded, 0);
  const std::vector<std::uint8_t> tx_bits = il.interleave<std::uint8_t>(coded);

  const std::size_t per_symbol = static_cast<std::size_t>(grid.streams) * static_cast<std::size_t>(grid.carriers);
  const std::size_t num_syms = padded / m;
  std::vector<float> llrs(padded);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t s = 0; s < num_syms; ++s) {
    const std::size_t pos = s % per_symbol;
    const double snr = grid.values[pos];
    const cplx x = map_symbol(tx_bits.data() + s * m, mod);
    const double sd = std::sqrt(0.5 / snr);
    const double nr = nd(rng);
    const double ni = nd(rng);
    const cplx y = x + cplx(sd * nr, sd * ni);
    symbol_llrs(y, snr, mod, llrs.data() + s * m);
  }

  std::vector<float> rx = il.deinterleave<float>(llrs);
  rx.resize(codeword);
  const std::vector<std::uint8_t> decoded = viterbi_decode(rx, mcs.code_rate, k);
  return decoded != payload;
}

// Frame f draws from derive_seed(seed, {Frame, f}); the result does not depend
// on evaluation order.
inline FerMeasurement simulate_fer(const SnrGrid& grid, int mcs_id, int frame_bytes, int num_frames,
                                   std::uint64_t seed) {
  grid.validate();
  if (frame_bytes <= 0) throw std::invalid_argument("frame_bytes must be positive");
  if (num_frames <= 0) throw std::invalid_argument("num_frames must be positive");
  const McsEntry& mcs = mcs_entry(mcs_id);

  FerMeasurement out;
  out.mcs = mcs_id;
  out.streams = grid.streams;
  out.frames_simulated = num_frames;
  const BlockInterleaver il(static_cast<std::size_t>(grid.carriers) * static_cast<std::size_t>(bits_per_symbol(mcs.modulation)));
  for (int f = 0; f < num_frames; ++f) {
    Rng rng(derive_seed(seed, {tag(Stream::Frame), static_cast<std::uint64_t>(f)}));
    if (simulate_frame(grid, mcs, il, frame_bytes, rng)) ++out.frames_in_error;
  }
  out.fer = static_cast<double>(out.frames_in_error) / num_frames;
  return out;
}

// Uncoded BPSK bypass: bit error rate at a single SNR.
inline double simulate_uncoded_bpsk_ber(double snr, long num_bits, std::uint64_t seed) {
  if (!(snr > 0.0)) throw std::invalid_argument("SNR must be positive");
  if (num_bits <= 0) throw std::invalid_argument("num_bits must be positive");
  Rng rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double sd = std::sqrt(0.5 / snr);
  long errors = 0;
  for (long i = 0; i < num_bits; ++i) {
    const std::uint8_t bit = static_cast<std::uint8_t>(rng() & 1U);
    const cplx x = map_symbol(&bit, Modulation::Bpsk);
    const double y = x.real() + sd * nd(rng);
    float l = 0.0F;
    symbol_llrs(cplx(y, 0.0), snr, Modulation::Bpsk, &l);
    const std::uint8_t hard = l < 0.0F ? 1 : 0;
    errors += hard != bit;
  }
  return static_cast<double>(errors) / static_cast<double>(num_bits);
}

}  // namespace mulink
