// SPDX-License-Identifier: Apache-2.0
//
// Multiuser SNR sweep: per trial draw channels, build reports, schedule at
// each SNR point, then measure ground-truth FER of every transmitting user on
// its true post-processing SNR grid.
#pragma once

#include "mulink/adaptation/post_snr.hpp"
#include "mulink/harness/config.hpp"
#include "mulink/harness/parallel.hpp"
#include "mulink/phy/link_sim.hpp"
#include "mulink/scheduler.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace mulink {

struct UserOutcome {
  int streams = 0;
  int mcs = kNoTransmission;
  bool accepted = false;  // predictor picked an MCS
  double fer = 0.0;
  int frames = 0;
  int errors = 0;
  double throughput = 0.0;  // Mb/s, zero when the FER target is missed
};

struct TrialRow {
  int snr_index = 0;
  double snr_db = 0.0;
  int trial = 0;
  bool ok = true;
  std::string error;
  std::vector<UserOutcome> users;
  int scheduled_users = 0;
  double sum_throughput = 0.0;
};

struct SummaryRow {
  double snr_db = 0.0;
  int trials_ok = 0;
  int trials_failed = 0;
  double mean_sum_throughput = 0.0;
  long frames = 0;
  long error_frames = 0;
  double aggregate_fer = 0.0;
  double fer_bound = 0.0;  // p0 + 2 sigma_MC
  std::vector<long> mcs_histogram;        // index 0 = NoTransmission, 1 + id otherwise
  std::vector<long> scheduled_histogram;  // 0..U users
  int scheduled_mode = 0;
};

struct ExperimentResult {
  std::vector<TrialRow> rows;  // (snr, trial) order
  std::vector<SummaryRow> summary;
};

inline std::vector<FeedbackReport> build_reports(const ChannelRealization& ch, const ChannelSpec& spec,
                                                 const QuantizerConfig& q) {
  std::vector<FeedbackReport> reports;
  for (int u = 0; u < ch.num_users(); ++u) {
    const int lmax = std::min(spec.num_rx_antennas[static_cast<std::size_t>(u)], spec.num_tx_antennas);
    reports.push_back(build_report(u, ch.users[static_cast<std::size_t>(u)], lmax, q));
  }
  return reports;
}

inline std::vector<TrialRow> run_trial(const ExperimentConfig& cfg, const LinkPredictor& predictor, int trial) {
  const std::size_t users = cfg.channel.num_rx_antennas.size();
  const ChannelRealization ch = draw_channel(cfg.channel, cfg.seed, static_cast<std::uint64_t>(trial));
  const std::vector<FeedbackReport> reports = build_reports(ch, cfg.channel, cfg.quantizer);

  std::vector<TrialRow> rows;
  for (std::size_t s = 0; s < cfg.snr_sweep_db.size(); ++s) {
    TrialRow row;
    row.snr_index = static_cast<int>(s);
    row.snr_db = cfg.snr_sweep_db[s];
    row.trial = trial;
    row.users.assign(users, UserOutcome{});
    try {
      SchedulerConfig sc;
      sc.num_tx = cfg.channel.num_tx_antennas;
      sc.noise_variance = db_to_linear(-row.snr_db);
      sc.estimate_leakage = cfg.interference_estimation;
      sc.utility = cfg.utility;
      sc.strict_improvement = cfg.strict_improvement;
      const ScheduleDecision d = greedy_adapt(reports, predictor, sc);

      std::vector<bool> silent(users, false);
      for (std::size_t u = 0; u < users; ++u) {
        row.users[u].streams = d.streams[u];
        row.users[u].mcs = d.mcs[u];
        row.users[u].accepted = d.streams[u] > 0 && d.mcs[u] != kNoTransmission;
        silent[u] = !row.users[u].accepted;
      }
      if (d.precoding && d.scheduled_users() > 0) {
        const std::vector<SnrGrid> truth = true_post_snr(ch, *d.precoding, sc.noise_variance, silent);
        for (std::size_t u = 0; u < users; ++u) {
          UserOutcome& o = row.users[u];
          if (!o.accepted) continue;
          const std::uint64_t seed = derive_seed(
              cfg.seed, {tag(Stream::Fer), static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(s), u});
          const FerMeasurement f = simulate_fer(truth[u], o.mcs, cfg.frame_bytes, cfg.fer_frames, seed);
          o.fer = f.fer;
          o.frames = f.frames_simulated;
          o.errors = f.frames_in_error;
          o.throughput = f.fer <= cfg.target_fer
                             ? throughput(mcs_rate(o.mcs, o.streams) * cfg.rate_scale(), f.fer)
                             : 0.0;
          row.sum_throughput += o.throughput;
          ++row.scheduled_users;
        }
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.users.assign(users, UserOutcome{});
      row.scheduled_users = 0;
      row.sum_throughput = 0.0;
      std::cerr << "trial " << trial << " snr " << row.snr_db << " dB failed: " << e.what() << '\n';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<SummaryRow> summarize(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows) {
  const std::size_t users = cfg.channel.num_rx_antennas.size();
  std::vector<SummaryRow> out(cfg.snr_sweep_db.size());
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].snr_db = cfg.snr_sweep_db[s];
    out[s].mcs_histogram.assign(static_cast<std::size_t>(kNumMcs) + 1, 0);
    out[s].scheduled_histogram.assign(users + 1, 0);
  }
  for (const TrialRow& r : rows) {
    SummaryRow& m = out[static_cast<std::size_t>(r.snr_index)];
    if (!r.ok) {
      ++m.trials_failed;
      continue;
    }
    ++m.trials_ok;
    m.mean_sum_throughput += r.sum_throughput;
    ++m.scheduled_histogram[static_cast<std::size_t>(r.scheduled_users)];
    for (const UserOutcome& o : r.users) {
      if (o.streams == 0) continue;
      ++m.mcs_histogram[static_cast<std::size_t>(o.mcs + 1)];
      m.frames += o.frames;
      m.error_frames += o.errors;
    }
  }
  const double p0 = cfg.target_fer;
  for (SummaryRow& m : out) {
    if (m.trials_ok > 0) m.mean_sum_throughput /= m.trials_ok;
    m.aggregate_fer = m.frames > 0 ? static_cast<double>(m.error_frames) / static_cast<double>(m.frames) : 0.0;
    m.fer_bound = m.frames > 0 ? p0 + 2.0 * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(m.frames)) : p0;
    long best = -1;
    for (std::size_t k = 0; k < m.scheduled_histogram.size(); ++k) {
      if (m.scheduled_histogram[k] > best) {
        best = m.scheduled_histogram[k];
        m.scheduled_mode = static_cast<int>(k);
      }
    }
  }
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const LinkPredictor& predictor, int threads) {
  cfg.validate();
  std::vector<std::vector<TrialRow>> per_trial(static_cast<std::size_t>(cfg.num_trials));
  parallel_for(per_trial.size(), threads,
               [&](std::size_t t) { per_trial[t] = run_trial(cfg, predictor, static_cast<int>(t)); });
  ExperimentResult res;
  for (std::size_t s = 0; s < cfg.snr_sweep_db.size(); ++s)
    for (const auto& tr : per_trial) res.rows.push_back(tr[s]);
  res.summary = summarize(cfg, res.rows);
  return res;
}

inline std::string results_to_csv(const ExperimentConfig& cfg, const std::vector<TrialRow>& rows) {
  const std::size_t users = cfg.channel.num_rx_antennas.size();
  std::ostringstream os;
  os << provenance_line(cfg) << '\n';
  os << "snr_db,trial,status,scheduled_users,sum_throughput_mbps";
  for (std::size_t u = 0; u < users; ++u)
    os << ",L_" << u << ",mcs_" << u << ",accept_" << u << ",fer_" << u << ",frames_" << u << ",errors_" << u
       << ",throughput_" << u;
  os << '\n';
  for (const TrialRow& r : rows) {
    os << fmt(r.snr_db) << ',' << r.trial << ',' << (r.ok ? "ok" : "failed") << ',' << r.scheduled_users << ','
       << fmt(r.sum_throughput);
    for (const UserOutcome& o : r.users)
      os << ',' << o.streams << ',' << o.mcs << ',' << (o.accepted ? 1 : 0) << ',' << fmt(o.fer) << ',' << o.frames
         << ',' << o.errors << ',' << fmt(o.throughput);
    os << '\n';
  }
  return os.str();
}

inline std::string summary_to_csv(const ExperimentConfig& cfg, const std::vector<SummaryRow>& rows) {
  const std::size_t users = cfg.channel.num_rx_antennas.size();
  std::ostringstream os;
  os << provenance_line(cfg) << '\n';
  os << "snr_db,trials_ok,trials_failed,mean_sum_throughput_mbps,frames,error_frames,aggregate_fer,fer_bound,"
        "scheduled_mode,mcs_none";
  for (int m = 0; m < kNumMcs; ++m) os << ",mcs_" << m;
  for (std::size_t k = 0; k <= users; ++k) os << ",users_" << k;
  os << '\n';
  for (const SummaryRow& r : rows) {
    os << fmt(r.snr_db) << ',' << r.trials_ok << ',' << r.trials_failed << ',' << fmt(r.mean_sum_throughput) << ','
       << r.frames << ',' << r.error_frames << ',' << fmt(r.aggregate_fer) << ',' << fmt(r.fer_bound) << ','
       << r.scheduled_mode;
    for (long c : r.mcs_histogram) os << ',' << c;
    for (long c : r.scheduled_histogram) os << ',' << c;
    os << '\n';
  }
  return os.str();
}

}  // namespace mulink
