// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mulink/phy/mcs.hpp"

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

// Row-column block interleaver. Bits are written column by column into a
// grid with `rows` rows and ceil(block/rows) columns and read out row by
// row; cells past the block length are skipped, so any block size works.
class BlockInterleaver {
 public:
  explicit BlockInterleaver(std::size_t block_bits, std::size_t rows = 16) : block_(block_bits) {
    if (block_bits == 0 || rows == 0) throw std::invalid_argument("interleaver block and rows must be positive");
    const std::size_t cols = (block_bits + rows - 1) / rows;
    forward_.assign(block_bits, 0);
    std::size_t out = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t k = c * rows + r;
        if (k < block_bits) forward_[k] = out++;
      }
    }
  }

  std::size_t block_bits() const { return block_; }

  // forward()[k] = output position of input bit k.
  const std::vector<std::size_t>& forward() const { return forward_; }

  template <class T>
  std::vector<T> interleave(std::span<const T> in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t b = 0; b < in.size(); b += block_)
      for (std::size_t k = 0; k < block_; ++k) out[b + forward_[k]] = in[b + k];
    return out;
  }

  template <class T>
  std::vector<T> deinterleave(std::span<const T> in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t b = 0; b < in.size(); b += block_)
      for (std::size_t k = 0; k < block_; ++k) out[b + k] = in[b + forward_[k]];
    return out;
  }

 private:
  void check(std::size_t n) const {
    if (n % block_ != 0) throw std::invalid_argument("partial interleaver block");
  }

  std::size_t block_;
  std::vector<std::size_t> forward_;
};

// Frame layout: each OFDM symbol carries streams * carriers * bps coded bits,
// split into one block of carriers * bps bits per stream; every block is
// interleaved independently.
inline std::size_t ofdm_symbol_bits(Modulation mod, int streams, int carriers) {
  return static_cast<std::size_t>(streams) * static_cast<std::size_t>(carriers) *
         static_cast<std::size_t>(bits_per_symbol(mod));
}

template <class T>
std::vector<T> interleave(std::span<const T> bits, Modulation mod, int streams, int carriers) {
  if (bits.size() % ofdm_symbol_bits(mod, streams, carriers) != 0)
    throw std::invalid_argument("partial OFDM symbol");
  const BlockInterleaver il(static_cast<std::size_t>(carriers) * bits_per_symbol(mod));
  return il.interleave(bits);
}

template <class T>
std::vector<T> deinterleave(std::span<const T> bits, Modulation mod, int streams, int carriers) {
  if (bits.size() % ofdm_symbol_bits(mod, streams, carriers) != 0)
    throw std::invalid_argument("partial OFDM symbol");
  const BlockInterleaver il(static_cast<std::size_t>(carriers) * bits_per_symbol(mod));
  return il.deinterleave(bits);
}

}  // namespace mulink
