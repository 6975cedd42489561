#include "mulink/phy/convolutional.hpp"
#include "mulink/phy/interleaver.hpp"
#include "mulink/phy/link_sim.hpp"
#include "mulink/phy/mcs.hpp"
#include "mulink/phy/modulation.hpp"

#include <catch_amalgamated.hpp>

#include <bitset>
#include <cmath>

using namespace mulink;

namespace {

std::vector<std::uint8_t> random_bits(std::size_t n, Rng& rng) {
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1U);
  return b;
}

// Shift-register encoder written from the tap lists, unpunctured.
std::vector<std::uint8_t> reference_encode(const std::vector<std::uint8_t>& payload) {
  std::array<int, 7> d{};
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> in = payload;
  in.insert(in.end(), 6, 0);
  for (auto bit : in) {
    for (int k = 6; k > 0; --k) d[k] = d[k - 1];
    d[0] = bit;
    out.push_back(static_cast<std::uint8_t>(d[0] ^ d[2] ^ d[3] ^ d[5] ^ d[6]));
    out.push_back(static_cast<std::uint8_t>(d[0] ^ d[1] ^ d[2] ^ d[3] ^ d[6]));
  }
  return out;
}

std::vector<float> hard_llrs(const std::vector<std::uint8_t>& bits) {
  std::vector<float> l(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) l[i] = bits[i] ? -1.0F : 1.0F;
  return l;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

constexpr std::array<CodeRate, 4> kRates{CodeRate::Half, CodeRate::TwoThirds, CodeRate::ThreeQuarters,
                                         CodeRate::FiveSixths};

}  // namespace

TEST_CASE("MCS table rates") {
  CHECK(mcs_rate(0, 1) == 6.5);
  CHECK(mcs_rate(8, 4) == 312.0);
  CHECK(mcs_rate(1, 2) == 26.0);
  CHECK(mcs_rate(kNoTransmission, 3) == 0.0);
  CHECK_THROWS_AS(mcs_entry(9), std::out_of_range);
  for (int m = 1; m < kNumMcs; ++m) CHECK(kMcsTable[m].base_rate_mbps > kMcsTable[m - 1].base_rate_mbps);
}

TEST_CASE("encoder matches the tap-list shift register") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto payload = random_bits(37 + trial, rng);
    CHECK(convolutional_encode(payload, CodeRate::Half) == reference_encode(payload));
  }
}

TEST_CASE("all-zero payload encodes to all zeros") {
  const std::vector<std::uint8_t> zero(100, 0);
  for (CodeRate r : kRates) {
    const auto c = convolutional_encode(zero, r);
    CHECK(std::all_of(c.begin(), c.end(), [](auto b) { return b == 0; }));
  }
}

TEST_CASE("codeword lengths") {
  CHECK(convolutional_encode(std::vector<std::uint8_t>(50, 1), CodeRate::Half).size() == 2 * (50 + 6));
  // 1024 payload bits: 1030 trellis steps, 2060 mother bits.
  CHECK(coded_length(1024, CodeRate::Half) == 2060);
  CHECK(coded_length(1024, CodeRate::TwoThirds) == 1545);
  CHECK(coded_length(1024, CodeRate::ThreeQuarters) == 1374);
  CHECK(coded_length(1024, CodeRate::FiveSixths) == 1236);
}

TEST_CASE("noiseless decode and re-encode round trip") {
  Rng rng(2);
  for (CodeRate r : kRates) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto payload = random_bits(200 + 13 * trial, rng);
      const auto coded = convolutional_encode(payload, r);
      const auto decoded = viterbi_decode(hard_llrs(coded), r, payload.size());
      CHECK(decoded == payload);
      CHECK(convolutional_encode(decoded, r) == coded);
    }
  }
}

TEST_CASE("every single coded-bit flip is corrected at rate 1/2") {
  Rng rng(4);
  const auto payload = random_bits(48, rng);
  const auto coded = convolutional_encode(payload, CodeRate::Half);
  for (std::size_t i = 0; i < coded.size(); ++i) {
    auto llr = hard_llrs(coded);
    llr[i] = -llr[i];
    CHECK(viterbi_decode(llr, CodeRate::Half, payload.size()) == payload);
  }
}

TEST_CASE("all-zero LLRs decode to some payload") {
  const std::vector<float> zeros(coded_length(64, CodeRate::ThreeQuarters), 0.0F);
  const auto d = viterbi_decode(zeros, CodeRate::ThreeQuarters, 64);
  CHECK(d.size() == 64);
  CHECK_THROWS_AS(viterbi_decode(std::vector<float>(10, 0.0F), CodeRate::Half, 64), std::invalid_argument);
}

TEST_CASE("interleaver is an invertible permutation") {
  Rng rng(6);
  for (std::size_t block : {16UL, 52UL, 104UL, 208UL, 312UL, 416UL, 7UL}) {
    const BlockInterleaver il(block);
    std::vector<std::size_t> seen(block, 0);
    for (std::size_t k : il.forward()) ++seen.at(k);
    CHECK(std::all_of(seen.begin(), seen.end(), [](auto c) { return c == 1; }));
    const auto x = random_bits(block * 3, rng);
    CHECK(il.deinterleave<std::uint8_t>(il.interleave<std::uint8_t>(x)) == x);
  }
}

TEST_CASE("16-bit block with 16 rows is the identity") {
  const BlockInterleaver il(16, 16);
  for (std::size_t k = 0; k < 16; ++k) CHECK(il.forward()[k] == k);
}

TEST_CASE("adjacent coded bits land on non-adjacent carriers for 52 carriers QPSK") {
  const BlockInterleaver il(52 * 2);
  for (std::size_t k = 0; k + 1 < 104; ++k) {
    const long a = static_cast<long>(il.forward()[k] / 2);
    const long b = static_cast<long>(il.forward()[k + 1] / 2);
    CHECK(std::abs(a - b) > 1);
  }
}

TEST_CASE("BPSK mapping convention") {
  const std::uint8_t zero = 0;
  const std::uint8_t one = 1;
  CHECK(map_symbol(&zero, Modulation::Bpsk) == cplx(1.0, 0.0));
  CHECK(map_symbol(&one, Modulation::Bpsk) == cplx(-1.0, 0.0));
}

TEST_CASE("constellations have unit average energy and Gray neighbours") {
  for (Modulation m : {Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64, Modulation::Qam256}) {
    const auto pts = constellation(m);
    double e = 0.0;
    for (const auto& p : pts) e += std::norm(p);
    CHECK(e / pts.size() == Catch::Approx(1.0).epsilon(1e-12));

    double dmin = 1e9;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b) dmin = std::min(dmin, std::abs(pts[a] - pts[b]));
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = a + 1; b < pts.size(); ++b)
        if (std::abs(std::abs(pts[a] - pts[b]) - dmin) < 1e-9) CHECK(std::bitset<8>(a ^ b).count() == 1);
  }
}

TEST_CASE("noiseless QPSK LLR signs recover the bits") {
  for (unsigned label = 0; label < 4; ++label) {
    const std::array<std::uint8_t, 2> bits{static_cast<std::uint8_t>(label >> 1), static_cast<std::uint8_t>(label & 1U)};
    const cplx s = map_symbol(bits.data(), Modulation::Qpsk);
    std::array<float, 2> l{};
    symbol_llrs(s, 10.0, Modulation::Qpsk, l.data());
    CHECK((l[0] < 0) == (bits[0] == 1));
    CHECK((l[1] < 0) == (bits[1] == 1));
  }
}

TEST_CASE("max-log LLRs match brute force over the constellation") {
  Rng rng(8);
  for (Modulation m : {Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64, Modulation::Qam256}) {
    const auto pts = constellation(m);
    const int bps = bits_per_symbol(m);
    for (int trial = 0; trial < 200; ++trial) {
      const cplx y(uniform(rng, -1.5, 1.5), uniform(rng, -1.5, 1.5));
      const double snr = uniform(rng, 0.5, 100.0);
      std::vector<float> l(static_cast<std::size_t>(bps));
      symbol_llrs(y, snr, m, l.data());
      for (int b = 0; b < bps; ++b) {
        double d0 = 1e300;
        double d1 = 1e300;
        for (std::size_t label = 0; label < pts.size(); ++label) {
          const double d = std::norm(y - pts[label]);
          if ((label >> (bps - 1 - b)) & 1U)
            d1 = std::min(d1, d);
          else
            d0 = std::min(d0, d);
        }
        CHECK(l[static_cast<std::size_t>(b)] == Catch::Approx(snr * (d1 - d0)).margin(1e-3).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("60 dB frames are exact round trips for every MCS") {
  const SnrGrid g = SnrGrid::uniform(2, 16, db_to_linear(60.0));
  for (int m = 0; m < kNumMcs; ++m) {
    const auto f = simulate_fer(g, m, kDefaultFrameBytes, m == 0 ? 1000 : 100, 31 + m);
    CHECK(f.frames_in_error == 0);
  }
}

TEST_CASE("256-QAM 3/4 at -10 dB always fails") {
  const auto f = simulate_fer(SnrGrid::uniform(1, 52, db_to_linear(-10.0)), 8, kDefaultFrameBytes, 1000, 5);
  CHECK(f.fer == 1.0);
  CHECK(f.frames_simulated == 1000);
}

TEST_CASE("uncoded BPSK BER within four standard errors of Q(sqrt(2 snr))") {
  const long n = 1'000'000;
  for (double db : {0.0, 4.0, 8.0}) {
    const double snr = db_to_linear(db);
    const double p = q_function(std::sqrt(2.0 * snr));
    const double ber = simulate_uncoded_bpsk_ber(snr, n, 77 + static_cast<std::uint64_t>(db));
    CHECK(std::abs(ber - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
  }
}

TEST_CASE("coded FER is monotone in SNR and in MCS order") {
  const int frames = 1000;
  const double slack = 2.0 / std::sqrt(static_cast<double>(frames));
  for (int m : {0, 3, 6}) {
    std::vector<double> fer;
    for (double db = -6.0 + 3.0 * m; db <= 8.0 + 3.0 * m; db += 2.0)
      fer.push_back(simulate_fer(SnrGrid::uniform(1, 16, db_to_linear(db)), m, kDefaultFrameBytes, frames, 9).fer);
    int inversions = 0;
    for (std::size_t i = 1; i < fer.size(); ++i) {
      if (fer[i] > fer[i - 1]) {
        ++inversions;
        CHECK(fer[i] - fer[i - 1] < slack);
      }
    }
    CHECK(inversions <= 1);
  }
  const SnrGrid g = SnrGrid::uniform(1, 16, db_to_linear(12.0));
  double prev = -1.0;
  for (int m = 0; m < kNumMcs; ++m) {
    const double f = simulate_fer(g, m, kDefaultFrameBytes, 300, 13).fer;
    CHECK(f >= prev - 2.0 / std::sqrt(300.0));
    prev = std::max(prev, f);
  }
}

TEST_CASE("FER measurement is deterministic and validates input") {
  const SnrGrid g = SnrGrid::uniform(2, 8, db_to_linear(7.0));
  const auto a = simulate_fer(g, 3, 64, 50, 1234);
  const auto b = simulate_fer(g, 3, 64, 50, 1234);
  CHECK(a.frames_in_error == b.frames_in_error);
  CHECK(a.fer == static_cast<double>(a.frames_in_error) / a.frames_simulated);
  SnrGrid bad = g;
  bad.values[3] = 0.0;
  CHECK_THROWS_AS(simulate_fer(bad, 0, 64, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_fer(g, 0, 0, 10, 1), std::invalid_argument);
}
