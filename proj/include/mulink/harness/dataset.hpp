// SPDX-License-Identifier: Apache-2.0
//
// Labelled (ordered SNR, MCS, L) -> FER samples from single-user,
// perfect-CSI links, and their CSV form.
#pragma once

#include "mulink/adaptation/features.hpp"
#include "mulink/adaptation/model.hpp"
#include "mulink/adaptation/post_snr.hpp"
#include "mulink/channel.hpp"
#include "mulink/harness/config.hpp"
#include "mulink/harness/parallel.hpp"
#include "mulink/phy/link_sim.hpp"
#include "mulink/precoding.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace mulink {

inline std::vector<double> training_levels_db(const TrainingConfig& t) {
  std::vector<double> v(static_cast<std::size_t>(t.num_levels));
  for (int i = 0; i < t.num_levels; ++i)
    v[static_cast<std::size_t>(i)] =
        t.num_levels == 1 ? t.snr_min_db : t.snr_min_db + (t.snr_max_db - t.snr_min_db) * i / (t.num_levels - 1);
  return v;
}

// Single user with N_rx = L and `tx` transmit antennas, exact CSI, noise
// variance 10^(-snr/10).
inline SnrGrid single_user_grid(const ChannelSpec& base, int streams, int tx, double snr_db, std::uint64_t seed) {
  if (tx < streams) throw std::invalid_argument("fewer transmit antennas than streams");
  ChannelSpec spec = base;
  spec.num_tx_antennas = tx;
  spec.num_rx_antennas = {streams};
  Rng rng(seed);
  const auto taps = draw_taps(spec, 0, rng);
  const std::vector<FeedbackReport> reports{
      build_report(0, taps_to_frequency(taps, spec.num_carriers), streams, QuantizerConfig::perfect())};
  const std::vector<int> alloc{streams};
  const PrecodingSolution sol = design_precoding(reports, alloc);
  return estimate_post_snr(reports, sol, db_to_linear(-snr_db), nullptr).front();
}

// Training transmit dimension for a channel index: cycles through L..N_tx,
// the dimensions a user's effective channel can have after block
// diagonalization.
inline int training_tx_antennas(int streams, int num_tx, std::size_t channel) {
  return streams + static_cast<int>(channel % static_cast<std::size_t>(num_tx - streams + 1));
}

// Samples ordered by (L, mcs, level, channel). `set` separates independent
// draws (0 = training, 1 = test). Channels are shared across MCS.
inline std::vector<TrainingSample> generate_training_set(const ExperimentConfig& cfg, std::uint64_t set, int threads) {
  cfg.validate();
  const TrainingConfig& t = cfg.training;
  const std::vector<double> levels = training_levels_db(t);
  const auto nl = static_cast<std::size_t>(t.num_levels);
  const auto nc = static_cast<std::size_t>(t.channels_per_level);
  const auto ns = static_cast<std::size_t>(t.max_streams);
  const auto nm = static_cast<std::size_t>(kNumMcs);

  std::vector<SnrGrid> grids(ns * nl * nc);
  parallel_for(grids.size(), threads, [&](std::size_t i) {
    const std::size_t ch = i % nc;
    const std::size_t lv = (i / nc) % nl;
    const std::size_t l = i / (nc * nl);
    const std::uint64_t seed = derive_seed(cfg.seed, {tag(Stream::Training), set, l + 1, lv, ch});
    const int streams = static_cast<int>(l) + 1;
    grids[i] = single_user_grid(cfg.channel, streams, training_tx_antennas(streams, cfg.channel.num_tx_antennas, ch),
                                levels[lv], seed);
  });

  std::vector<TrainingSample> out(ns * nm * nl * nc);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const std::size_t ch = i % nc;
    const std::size_t lv = (i / nc) % nl;
    const std::size_t m = (i / (nc * nl)) % nm;
    const std::size_t l = i / (nc * nl * nm);
    const SnrGrid& g = grids[(l * nl + lv) * nc + ch];
    const std::uint64_t seed = derive_seed(cfg.seed, {tag(Stream::Fer), set, l + 1, m, lv, ch});
    const FerMeasurement f = simulate_fer(g, static_cast<int>(m), cfg.frame_bytes, t.fer_frames, seed);
    TrainingSample& s = out[i];
    s.mcs = static_cast<int>(m);
    s.streams = static_cast<int>(l) + 1;
    s.fer = f.fer;
    s.label = label_for(f.fer, cfg.target_fer);
    s.snr_db = ordered_snr_db(g);
  });
  return out;
}

// Header mcs,L,fer,label,snr_1..snr_K with K the longest row; shorter rows
// leave trailing cells empty.
inline std::string dataset_to_csv(const std::vector<TrainingSample>& samples, const std::string& provenance) {
  std::size_t width = 0;
  for (const auto& s : samples) width = std::max(width, s.snr_db.size());
  std::ostringstream os;
  if (!provenance.empty()) os << provenance << '\n';
  os << "mcs,L,fer,label";
  for (std::size_t k = 1; k <= width; ++k) os << ",snr_" << k;
  os << '\n';
  for (const auto& s : samples) {
    os << s.mcs << ',' << s.streams << ',' << fmt(s.fer) << ',' << s.label;
    for (std::size_t k = 0; k < width; ++k) {
      os << ',';
      if (k < s.snr_db.size()) os << fmt(s.snr_db[k]);
    }
    os << '\n';
  }
  return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline double parse_double(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(std::string("malformed dataset: bad ") + what);
  }
  if (pos != s.size()) throw ConfigError(std::string("malformed dataset: bad ") + what);
  return v;
}

inline std::vector<TrainingSample> dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::vector<TrainingSample> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (!header) {
      if (cells.size() < 5 || cells[0] != "mcs" || cells[1] != "L" || cells[2] != "fer" || cells[3] != "label")
        throw ConfigError("malformed dataset: unexpected header");
      header = true;
      continue;
    }
    if (cells.size() < 5) throw ConfigError("malformed dataset: short row");
    TrainingSample s;
    s.mcs = static_cast<int>(parse_double(cells[0], "mcs"));
    s.streams = static_cast<int>(parse_double(cells[1], "L"));
    s.fer = parse_double(cells[2], "fer");
    s.label = static_cast<int>(parse_double(cells[3], "label"));
    if (s.mcs < 0 || s.mcs >= kNumMcs || s.streams < 1 || (s.label != 1 && s.label != -1) || s.fer < 0.0 ||
        s.fer > 1.0)
      throw ConfigError("malformed dataset: field out of range");
    for (std::size_t k = 4; k < cells.size(); ++k) {
      if (cells[k].empty()) break;
      s.snr_db.push_back(parse_double(cells[k], "snr"));
    }
    if (s.snr_db.empty()) throw ConfigError("malformed dataset: row without SNR values");
    if (!std::is_sorted(s.snr_db.begin(), s.snr_db.end())) throw ConfigError("malformed dataset: SNR not ascending");
    out.push_back(std::move(s));
  }
  if (!header) throw ConfigError("malformed dataset: missing header");
  return out;
}

// Grid with the sample's values (arrangement is irrelevant to every
// permutation-invariant predictor).
inline SnrGrid sample_grid(const TrainingSample& s) {
  if (s.snr_db.size() % static_cast<std::size_t>(s.streams) != 0)
    throw std::invalid_argument("SNR count is not a multiple of L");
  SnrGrid g(0, s.streams, static_cast<int>(s.snr_db.size()) / s.streams);
  std::transform(s.snr_db.begin(), s.snr_db.end(), g.values.begin(), db_to_linear);
  return g;
}

}  // namespace mulink
