// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mulink {

enum class Modulation { Bpsk, Qpsk, Qam16, Qam64, Qam256 };

enum class CodeRate { Half, TwoThirds, ThreeQuarters, FiveSixths };

constexpr int bits_per_symbol(Modulation m) {
  switch (m) {
    case Modulation::Bpsk: return 1;
    case Modulation::Qpsk: return 2;
    case Modulation::Qam16: return 4;
    case Modulation::Qam64: return 6;
    case Modulation::Qam256: return 8;
  }
  return 0;
}

constexpr std::string_view modulation_name(Modulation m) {
  switch (m) {
    case Modulation::Bpsk: return "BPSK";
    case Modulation::Qpsk: return "QPSK";
    case Modulation::Qam16: return "16-QAM";
    case Modulation::Qam64: return "64-QAM";
    case Modulation::Qam256: return "256-QAM";
  }
  return "?";
}

constexpr std::string_view code_rate_name(CodeRate r) {
  switch (r) {
    case CodeRate::Half: return "1/2";
    case CodeRate::TwoThirds: return "2/3";
    case CodeRate::ThreeQuarters: return "3/4";
    case CodeRate::FiveSixths: return "5/6";
  }
  return "?";
}

struct McsEntry {
  int id;
  Modulation modulation;
  CodeRate code_rate;
  double base_rate_mbps;  // one spatial stream, 20 MHz, 800 ns GI

  std::string name() const {
    return std::string(modulation_name(modulation)) + " " + std::string(code_rate_name(code_rate));
  }
};

// Zero-rate outcome when no MCS is predicted to meet the FER target.
inline constexpr int kNoTransmission = -1;

inline constexpr std::array<McsEntry, 9> kMcsTable{{
    {0, Modulation::Bpsk, CodeRate::Half, 6.5},
    {1, Modulation::Qpsk, CodeRate::Half, 13.0},
    {2, Modulation::Qpsk, CodeRate::ThreeQuarters, 19.5},
    {3, Modulation::Qam16, CodeRate::Half, 26.0},
    {4, Modulation::Qam16, CodeRate::ThreeQuarters, 39.0},
    {5, Modulation::Qam64, CodeRate::TwoThirds, 52.0},
    {6, Modulation::Qam64, CodeRate::ThreeQuarters, 58.5},
    {7, Modulation::Qam64, CodeRate::FiveSixths, 65.0},
    {8, Modulation::Qam256, CodeRate::ThreeQuarters, 78.0},
}};

inline constexpr int kNumMcs = static_cast<int>(kMcsTable.size());

inline const McsEntry& mcs_entry(int id) {
  if (id < 0 || id >= kNumMcs) throw std::out_of_range("unknown MCS id " + std::to_string(id));
  return kMcsTable[static_cast<std::size_t>(id)];
}

inline std::string mcs_name(int id) { return id == kNoTransmission ? "NoTransmission" : mcs_entry(id).name(); }

// eta(c, L) in Mb/s; NoTransmission carries zero rate.
inline double mcs_rate(int id, int streams) {
  if (id == kNoTransmission) return 0.0;
  if (streams < 1) throw std::invalid_argument("stream count must be >= 1");
  return streams * mcs_entry(id).base_rate_mbps;
}

}  // namespace mulink
