// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mulink/adaptation/model.hpp"
#include "mulink/harness/config.hpp"
#include "mulink/harness/dataset.hpp"
#include "mulink/harness/parallel.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mulink {

inline TrainOptions train_options(const ExperimentConfig& cfg) {
  TrainOptions o;
  o.folds = cfg.training.folds;
  o.feature_count = cfg.training.feature_count;
  o.seed = cfg.seed;
  return o;
}

// One component per (mcs, L) present in the data, in (L, mcs) order.
inline TrainedModel train_pipeline(const std::vector<TrainingSample>& samples, const TrainOptions& opt,
                                   double target_fer, int threads) {
  std::map<std::pair<int, int>, std::vector<TrainingSample>> groups;
  for (const auto& s : samples) groups[{s.streams, s.mcs}].push_back(s);
  if (groups.empty()) throw ConfigError("dataset is empty");
  std::vector<const std::vector<TrainingSample>*> order;
  for (const auto& [key, g] : groups) order.push_back(&g);

  TrainedModel m;
  m.feature_count = opt.feature_count;
  m.target_fer = target_fer;
  m.components.resize(order.size());
  parallel_for(order.size(), threads, [&](std::size_t i) { m.components[i] = train_component(*order[i], opt); });
  return m;
}

inline double accuracy_gain(double err_base, double err_svm) {
  if (!(err_base > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (err_base - err_svm) / err_base;
}

struct ComparisonRow {
  int mcs = 0;
  int streams = 1;
  long samples = 0;
  double err_svm = 0.0;
  double err_avg = 0.0;
  double err_eff = 0.0;

  double gain_avg() const { return accuracy_gain(err_avg, err_svm); }
  double gain_eff() const { return accuracy_gain(err_eff, err_svm); }
};

// Test-set misclassification per component for the three predictors.
inline std::vector<ComparisonRow> compare_classifiers(const TrainedModel& model,
                                                      const std::vector<TrainingSample>& test) {
  std::map<std::pair<int, int>, ComparisonRow> rows;
  const ModelPredictor svm(model, ClassifierKind::Svm);
  const ModelPredictor avg(model, ClassifierKind::AvgSnr);
  const ModelPredictor eff(model, ClassifierKind::EffSnr);
  std::map<std::pair<int, int>, std::array<long, 3>> wrong;
  for (const auto& s : test) {
    auto& r = rows[{s.streams, s.mcs}];
    r.mcs = s.mcs;
    r.streams = s.streams;
    ++r.samples;
    const SnrGrid g = sample_grid(s);
    const bool truth = s.label > 0;
    auto& w = wrong[{s.streams, s.mcs}];
    w[0] += svm.accepts(s.mcs, s.streams, g) != truth;
    w[1] += avg.accepts(s.mcs, s.streams, g) != truth;
    w[2] += eff.accepts(s.mcs, s.streams, g) != truth;
  }
  std::vector<ComparisonRow> out;
  for (auto& [key, r] : rows) {
    const auto& w = wrong[key];
    r.err_svm = static_cast<double>(w[0]) / r.samples;
    r.err_avg = static_cast<double>(w[1]) / r.samples;
    r.err_eff = static_cast<double>(w[2]) / r.samples;
    out.push_back(r);
  }
  return out;
}

inline std::string comparison_to_csv(const std::vector<ComparisonRow>& rows, const std::string& provenance) {
  std::ostringstream os;
  if (!provenance.empty()) os << provenance << '\n';
  os << "mcs,L,name,samples,err_svm,err_avg_snr,err_eff_snr,gain_vs_avg_snr,gain_vs_eff_snr\n";
  double s_svm = 0.0;
  double s_avg = 0.0;
  double s_eff = 0.0;
  auto cell = [](double v) { return std::isnan(v) ? std::string() : fmt(v); };
  for (const auto& r : rows) {
    os << r.mcs << ',' << r.streams << ',' << mcs_name(r.mcs) << ',' << r.samples << ',' << fmt(r.err_svm) << ','
       << fmt(r.err_avg) << ',' << fmt(r.err_eff) << ',' << cell(r.gain_avg()) << ',' << cell(r.gain_eff()) << '\n';
    s_svm += r.err_svm;
    s_avg += r.err_avg;
    s_eff += r.err_eff;
  }
  if (!rows.empty()) {
    const double n = static_cast<double>(rows.size());
    os << "average,,,," << fmt(s_svm / n) << ',' << fmt(s_avg / n) << ',' << fmt(s_eff / n) << ','
       << cell(accuracy_gain(s_avg / n, s_svm / n)) << ',' << cell(accuracy_gain(s_eff / n, s_svm / n)) << '\n';
  }
  return os.str();
}

}  // namespace mulink
