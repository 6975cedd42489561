// SPDX-License-Identifier: Apache-2.0
//
// Binary convolutional code, K = 7, generators 133/171 (octal), zero-tail
// terminated, with the 802.11 puncturing patterns. Soft-input Viterbi decoder
// over the full frame (no sliding window).
#pragma once

#include "mulink/phy/mcs.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

namespace conv {

inline constexpr unsigned kGenA = 0133;
inline constexpr unsigned kGenB = 0171;
inline constexpr int kStates = 64;
inline constexpr std::size_t kTailBits = 6;

inline constexpr std::array<std::uint8_t, 2> kPunctureHalf{1, 1};
inline constexpr std::array<std::uint8_t, 4> kPunctureTwoThirds{1, 1, 1, 0};
inline constexpr std::array<std::uint8_t, 6> kPunctureThreeQuarters{1, 1, 1, 0, 0, 1};
inline constexpr std::array<std::uint8_t, 10> kPunctureFiveSixths{1, 1, 1, 0, 0, 1, 1, 0, 0, 1};

// Two output bits (A << 1 | B) for the 7-bit register (input << 6 | state).
constexpr std::array<std::uint8_t, 128> make_output_table() {
  std::array<std::uint8_t, 128> t{};
  for (unsigned reg = 0; reg < 128; ++reg) {
    const unsigned a = static_cast<unsigned>(std::popcount(reg & kGenA)) & 1U;
    const unsigned b = static_cast<unsigned>(std::popcount(reg & kGenB)) & 1U;
    t[reg] = static_cast<std::uint8_t>((a << 1) | b);
  }
  return t;
}

inline constexpr std::array<std::uint8_t, 128> kOutputs = make_output_table();

}  // namespace conv

inline std::span<const std::uint8_t> puncture_pattern(CodeRate rate) {
  switch (rate) {
    case CodeRate::Half: return conv::kPunctureHalf;
    case CodeRate::TwoThirds: return conv::kPunctureTwoThirds;
    case CodeRate::ThreeQuarters: return conv::kPunctureThreeQuarters;
    case CodeRate::FiveSixths: return conv::kPunctureFiveSixths;
  }
  throw std::invalid_argument("unknown code rate");
}

inline std::size_t mother_code_length(std::size_t payload_bits) { return 2 * (payload_bits + conv::kTailBits); }

inline std::size_t coded_length(std::size_t payload_bits, CodeRate rate) {
  const auto pat = puncture_pattern(rate);
  const std::size_t m = mother_code_length(payload_bits);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < m; ++i) kept += pat[i % pat.size()];
  return kept;
}

// Appends the six zero tail bits, encodes, and punctures.
inline std::vector<std::uint8_t> convolutional_encode(std::span<const std::uint8_t> payload, CodeRate rate) {
  const auto pat = puncture_pattern(rate);
  std::vector<std::uint8_t> out;
  out.reserve(coded_length(payload.size(), rate));
  unsigned state = 0;
  std::size_t pos = 0;
  auto emit = [&](unsigned bit) {
    if (pat[pos % pat.size()]) out.push_back(static_cast<std::uint8_t>(bit));
    ++pos;
  };
  const std::size_t total = payload.size() + conv::kTailBits;
  for (std::size_t i = 0; i < total; ++i) {
    const unsigned in = i < payload.size() ? (payload[i] & 1U) : 0U;
    const unsigned reg = (in << 6) | state;
    const unsigned o = conv::kOutputs[reg];
    emit(o >> 1);
    emit(o & 1U);
    state = reg >> 1;
  }
  return out;
}

// Punctured LLRs -> mother-code LLRs; removed positions carry zero.
inline std::vector<float> depuncture(std::span<const float> llrs, CodeRate rate, std::size_t payload_bits) {
  if (llrs.size() != coded_length(payload_bits, rate))
    throw std::invalid_argument("LLR count does not match the codeword length");
  const auto pat = puncture_pattern(rate);
  const std::size_t m = mother_code_length(payload_bits);
  std::vector<float> out(m, 0.0F);
  std::size_t k = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (pat[i % pat.size()]) out[i] = llrs[k++];
  return out;
}

// Branch-metric signs of the butterfly j: predecessors 2j, 2j+1 and
// successors j, j+32. Both generators tap the newest and oldest register
// bits, so the four branches carry +m, -m, -m, +m with m = sa*la + sb*lb for
// the (2j -> j) branch.
struct ButterflySigns {
  std::array<float, conv::kStates / 2> a{};
  std::array<float, conv::kStates / 2> b{};
};

constexpr ButterflySigns make_butterfly_signs() {
  ButterflySigns s;
  for (unsigned j = 0; j < conv::kStates / 2; ++j) {
    const unsigned o = conv::kOutputs[2 * j];
    s.a[j] = (o >> 1) ? -1.0F : 1.0F;
    s.b[j] = (o & 1U) ? -1.0F : 1.0F;
  }
  return s;
}

inline constexpr ButterflySigns kButterfly = make_butterfly_signs();

// Positive LLR favours bit 0. Returns the payload of the maximum-metric
// path that ends in the all-zero state.
inline std::vector<std::uint8_t> viterbi_decode(std::span<const float> llrs, CodeRate rate, std::size_t payload_bits) {
  static_assert((conv::kGenA & conv::kGenB & 0101U) == 0101U, "butterfly symmetry needs taps at both ends");
  constexpr std::size_t kHalf = conv::kStates / 2;
  const std::vector<float> mother = depuncture(llrs, rate, payload_bits);
  const std::size_t steps = payload_bits + conv::kTailBits;

  constexpr float kUnreachable = -1.0e30F;
  alignas(32) std::array<float, conv::kStates> pm;
  alignas(32) std::array<float, conv::kStates> next;
  alignas(32) std::array<float, kHalf> even;
  alignas(32) std::array<float, kHalf> odd;
  alignas(32) std::array<float, kHalf> m;
  pm.fill(kUnreachable);
  pm[0] = 0.0F;
  // decisions[t * 64 + ns] = low bit of the surviving predecessor.
  std::vector<std::uint8_t> decisions(steps * conv::kStates);

  for (std::size_t t = 0; t < steps; ++t) {
    const float la = mother[2 * t];
    const float lb = mother[2 * t + 1];
    for (std::size_t j = 0; j < kHalf; ++j) {
      even[j] = pm[2 * j];
      odd[j] = pm[2 * j + 1];
      m[j] = kButterfly.a[j] * la + kButterfly.b[j] * lb;
    }
    std::uint8_t* dec = decisions.data() + t * conv::kStates;
    for (std::size_t j = 0; j < kHalf; ++j) {
      const float a0 = even[j] + m[j];
      const float a1 = odd[j] - m[j];
      const float b0 = even[j] - m[j];
      const float b1 = odd[j] + m[j];
      dec[j] = a1 > a0;
      next[j] = a1 > a0 ? a1 : a0;
      dec[j + kHalf] = b1 > b0;
      next[j + kHalf] = b1 > b0 ? b1 : b0;
    }
    float best = next[0];
    for (std::size_t s = 1; s < conv::kStates; ++s) best = std::max(best, next[s]);
    for (std::size_t s = 0; s < conv::kStates; ++s) pm[s] = next[s] - best;
  }

  std::vector<std::uint8_t> bits(steps);
  unsigned ns = 0;
  for (std::size_t t = steps; t-- > 0;) {
    const unsigned x = decisions[t * conv::kStates + ns];
    bits[t] = static_cast<std::uint8_t>(ns >> 5);
    ns = ((ns << 1) | x) & 63U;
  }
  bits.resize(payload_bits);
  return bits;
}

}  // namespace mulink
