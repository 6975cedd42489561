// SPDX-License-Identifier: Apache-2.0
//
// Stream allocation and MCS assignment: greedy stream-by-stream growth and an
// exhaustive oracle, both scoring candidates through the same
// precoding -> leakage -> post-SNR -> MCS pipeline.
#pragma once

#include "mulink/adaptation/model.hpp"
#include "mulink/adaptation/post_snr.hpp"
#include "mulink/feedback.hpp"
#include "mulink/phy/mcs.hpp"
#include "mulink/precoding.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mulink {

inline constexpr double kInfeasibleUtility = -std::numeric_limits<double>::infinity();

inline double utility_sum(std::span<const double> t) {
  double s = 0.0;
  for (double v : t) {
    if (v < 0.0) throw std::invalid_argument("negative throughput");
    s += v;
  }
  return s;
}

// Sum of logs over scheduled users; a scheduled user at zero throughput
// yields the infeasible sentinel.
inline double utility_log(std::span<const double> t, std::span<const int> streams) {
  if (t.size() != streams.size()) throw std::invalid_argument("one stream count per user required");
  double s = 0.0;
  for (std::size_t u = 0; u < t.size(); ++u) {
    if (t[u] < 0.0) throw std::invalid_argument("negative throughput");
    if (streams[u] == 0) continue;
    if (t[u] == 0.0) return kInfeasibleUtility;
    s += std::log(t[u]);
  }
  return s;
}

inline double throughput(double rate, double fer) { return rate * (1.0 - fer); }

enum class UtilityKind { Sum, Log };

struct SchedulerConfig {
  int num_tx = 4;
  double noise_variance = 1.0;
  bool estimate_leakage = true;
  UtilityKind utility = UtilityKind::Sum;
  bool strict_improvement = false;
  long exhaustive_limit = 4096;
};

struct ScheduleDecision {
  std::vector<int> streams;
  std::vector<int> mcs;
  std::vector<double> throughput;  // rate proxy, Mb/s
  double utility = 0.0;
  bool feasible = true;
  std::optional<PrecodingSolution> precoding;
  std::vector<SnrGrid> estimated_snr;
  std::vector<double> trajectory;  // incumbent utility after each greedy step

  int total_streams() const { return std::accumulate(streams.begin(), streams.end(), 0); }

  int scheduled_users() const {
    int n = 0;
    for (std::size_t u = 0; u < streams.size(); ++u)
      if (streams[u] > 0 && mcs[u] != kNoTransmission) ++n;
    return n;
  }
};

class CandidateEvaluator {
 public:
  CandidateEvaluator(std::span<const FeedbackReport> reports, const LinkPredictor& predictor,
                     const SchedulerConfig& cfg)
      : reports_(reports), predictor_(predictor), cfg_(cfg), leakage_(reports) {
    if (reports.empty()) throw std::invalid_argument("no users");
  }

  std::size_t users() const { return reports_.size(); }
  int max_streams(std::size_t u) const { return std::min(reports_[u].streams, cfg_.num_tx); }

  ScheduleDecision evaluate(std::span<const int> streams) {
    ScheduleDecision d;
    d.streams.assign(streams.begin(), streams.end());
    d.mcs.assign(streams.size(), kNoTransmission);
    d.throughput.assign(streams.size(), 0.0);
    if (std::accumulate(streams.begin(), streams.end(), 0) == 0) {
      d.utility = score(d);
      return d;
    }
    try {
      d.precoding = design_precoding(reports_, streams);
      d.estimated_snr =
          estimate_post_snr(reports_, *d.precoding, cfg_.noise_variance, cfg_.estimate_leakage ? &leakage_ : nullptr);
    } catch (const InfeasibleConfiguration&) {
      d.feasible = false;
      d.precoding.reset();
      d.utility = kInfeasibleUtility;
      return d;
    }
    for (std::size_t u = 0; u < streams.size(); ++u) {
      if (streams[u] == 0) continue;
      d.mcs[u] = select_mcs(d.estimated_snr[u], streams[u], predictor_);
      d.throughput[u] = mcs_rate(d.mcs[u], streams[u]);
    }
    d.utility = score(d);
    return d;
  }

 private:
  double score(const ScheduleDecision& d) const {
    return cfg_.utility == UtilityKind::Sum ? utility_sum(d.throughput) : utility_log(d.throughput, d.streams);
  }

  std::span<const FeedbackReport> reports_;
  const LinkPredictor& predictor_;
  const SchedulerConfig& cfg_;
  LeakageModel leakage_;
};

// Adds one stream per iteration to the user giving the highest utility
// (lowest index on ties) while the utility does not decrease.
inline ScheduleDecision greedy_adapt(std::span<const FeedbackReport> reports, const LinkPredictor& predictor,
                                     const SchedulerConfig& cfg) {
  CandidateEvaluator eval(reports, predictor, cfg);
  std::vector<int> alloc(eval.users(), 0);
  ScheduleDecision incumbent = eval.evaluate(alloc);
  std::vector<double> trajectory{incumbent.utility};

  while (incumbent.total_streams() < cfg.num_tx) {
    std::optional<ScheduleDecision> best;
    for (std::size_t u = 0; u < eval.users(); ++u) {
      if (alloc[u] >= eval.max_streams(u)) continue;
      std::vector<int> trial = alloc;
      ++trial[u];
      ScheduleDecision d = eval.evaluate(trial);
      if (!d.feasible) continue;
      if (!best || d.utility > best->utility) best = std::move(d);
    }
    if (!best) break;
    const bool accept =
        cfg.strict_improvement ? best->utility > incumbent.utility : best->utility >= incumbent.utility;
    if (!accept) break;
    alloc = best->streams;
    incumbent = std::move(*best);
    trajectory.push_back(incumbent.utility);
  }
  incumbent.trajectory = std::move(trajectory);
  return incumbent;
}

// Every allocation with sum L_u <= N_tx, in lexicographic order; the first
// maximizer wins.
inline ScheduleDecision exhaustive_adapt(std::span<const FeedbackReport> reports, const LinkPredictor& predictor,
                                         const SchedulerConfig& cfg) {
  CandidateEvaluator eval(reports, predictor, cfg);
  long count = 1;
  for (std::size_t u = 0; u < eval.users(); ++u) {
    count *= eval.max_streams(u) + 1;
    if (count > cfg.exhaustive_limit) throw std::length_error("exhaustive search exceeds the configured limit");
  }
  std::vector<int> alloc(eval.users(), 0);
  std::optional<ScheduleDecision> best;
  for (;;) {
    if (std::accumulate(alloc.begin(), alloc.end(), 0) <= cfg.num_tx) {
      ScheduleDecision d = eval.evaluate(alloc);
      if (d.feasible && (!best || d.utility > best->utility)) best = std::move(d);
    }
    // Odometer increment, last user fastest.
    std::size_t pos = eval.users();
    while (pos > 0) {
      --pos;
      if (alloc[pos] < eval.max_streams(pos)) {
        ++alloc[pos];
        break;
      }
      alloc[pos] = 0;
      if (pos == 0) {
        pos = eval.users() + 1;
        break;
      }
    }
    if (pos == eval.users() + 1) break;
  }
  return *best;
}

}  // namespace mulink
