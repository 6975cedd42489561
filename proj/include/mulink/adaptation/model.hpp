// SPDX-License-Identifier: Apache-2.0
//
// Per-(MCS, L) link-quality classifiers, their persistence, and MCS
// selection on top of any accept/reject predictor.
#pragma once

#include "mulink/adaptation/baselines.hpp"
#include "mulink/adaptation/features.hpp"
#include "mulink/adaptation/svm.hpp"
#include "mulink/phy/mcs.hpp"
#include "mulink/snr_grid.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mulink {

struct TrainingSample {
  int mcs = 0;
  int streams = 1;
  double fer = 0.0;
  int label = 1;
  std::vector<double> snr_db;  // ascending, all L*N values
};

inline int label_for(double fer, double p0) { return fer <= p0 ? 1 : -1; }

enum class ClassifierKind { Svm, AvgSnr, EffSnr };

inline std::string classifier_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::AvgSnr: return "avg_snr";
    case ClassifierKind::EffSnr: return "eff_snr";
  }
  return "?";
}

inline ClassifierKind parse_classifier(const std::string& s) {
  if (s == "svm") return ClassifierKind::Svm;
  if (s == "avg_snr") return ClassifierKind::AvgSnr;
  if (s == "eff_snr") return ClassifierKind::EffSnr;
  throw ConfigError("unknown classifier kind: " + s);
}

struct ComponentModel {
  int mcs = 0;
  int streams = 1;
  Standardizer scaler;
  SvmModel svm;
  double cv_error = 0.0;
  bool flagged = false;  // single class or too few samples for K folds
  ThresholdRule avg;
  EffSnrRule eff;
  long positives = 0;
  long negatives = 0;
};

struct TrainOptions {
  std::vector<double> c_grid = default_c_grid();
  std::vector<double> rho_grid = default_rho_grid();
  std::vector<double> beta_grid = default_beta_grid();
  int folds = 4;
  int feature_count = kDefaultFeatureCount;
  double fallback_c = 8.0;
  double fallback_rho = 2.0;
  std::uint64_t seed = 0;
};

inline ComponentModel train_component(std::span<const TrainingSample> samples, const TrainOptions& opt) {
  if (samples.empty()) throw std::invalid_argument("no samples for component");
  ComponentModel m;
  m.mcs = samples.front().mcs;
  m.streams = samples.front().streams;
  std::vector<Feature> raw;
  std::vector<std::vector<double>> linear;
  std::vector<int> y;
  for (const auto& s : samples) {
    if (s.mcs != m.mcs || s.streams != m.streams) throw std::invalid_argument("mixed components");
    raw.push_back(order_statistics(s.snr_db, opt.feature_count));
    std::vector<double> lin(s.snr_db.size());
    std::transform(s.snr_db.begin(), s.snr_db.end(), lin.begin(), db_to_linear);
    linear.push_back(std::move(lin));
    y.push_back(s.label);
  }
  m.positives = std::count(y.begin(), y.end(), 1);
  m.negatives = static_cast<long>(y.size()) - m.positives;

  m.scaler = Standardizer::fit(raw);
  std::vector<Feature> x;
  x.reserve(raw.size());
  for (const auto& f : raw) x.push_back(m.scaler.apply(f));

  if (m.positives == 0 || m.negatives == 0) {
    m.flagged = true;
    m.svm = constant_model(m.positives > 0 ? 1 : -1, opt.fallback_c, opt.fallback_rho);
  } else if (m.positives < opt.folds || m.negatives < opt.folds) {
    m.flagged = true;
    m.svm = svm_train(x, y, opt.fallback_c, opt.fallback_rho).model;
  } else {
    const std::uint64_t seed = derive_seed(
        opt.seed, {tag(Stream::Folds), static_cast<std::uint64_t>(m.mcs), static_cast<std::uint64_t>(m.streams)});
    const CvResult cv = cross_validate(x, y, opt.c_grid, opt.rho_grid, opt.folds, seed);
    m.cv_error = cv.error;
    m.svm = svm_train(x, y, cv.c, cv.rho).model;
  }
  m.avg = fit_avg_snr(linear, y);
  m.eff = fit_eff_snr(linear, y, opt.beta_grid);
  return m;
}

struct TrainedModel {
  int feature_count = kDefaultFeatureCount;
  double target_fer = 0.1;
  std::vector<ComponentModel> components;

  const ComponentModel* find(int mcs, int streams) const {
    for (const auto& c : components)
      if (c.mcs == mcs && c.streams == streams) return &c;
    return nullptr;
  }

  const ComponentModel& at(int mcs, int streams) const {
    const ComponentModel* c = find(mcs, streams);
    if (!c) throw std::out_of_range("no classifier for MCS " + std::to_string(mcs) + ", L=" + std::to_string(streams));
    return *c;
  }
};

// Decides whether an MCS meets the FER target on a given grid.
class LinkPredictor {
 public:
  virtual ~LinkPredictor() = default;
  virtual bool accepts(int mcs, int streams, const SnrGrid& grid) const = 0;
};

class ModelPredictor final : public LinkPredictor {
 public:
  ModelPredictor(const TrainedModel& model, ClassifierKind kind) : model_(model), kind_(kind) {}

  bool accepts(int mcs, int streams, const SnrGrid& grid) const override {
    const ComponentModel& c = model_.at(mcs, streams);
    switch (kind_) {
      case ClassifierKind::Svm:
        return c.svm.predict(c.scaler.apply(order_stats_features(grid, model_.feature_count))) > 0;
      case ClassifierKind::AvgSnr:
        return c.avg.predict(mean_snr(grid.values)) > 0;
      case ClassifierKind::EffSnr:
        return c.eff.predict(grid.values) > 0;
    }
    return false;
  }

  ClassifierKind kind() const { return kind_; }

 private:
  const TrainedModel& model_;
  ClassifierKind kind_;
};

// Hand-built predictor from a plain function (tests, oracles).
class FunctionPredictor final : public LinkPredictor {
 public:
  using Fn = std::function<bool(int, int, const SnrGrid&)>;
  explicit FunctionPredictor(Fn fn) : fn_(std::move(fn)) {}
  bool accepts(int mcs, int streams, const SnrGrid& grid) const override { return fn_(mcs, streams, grid); }

 private:
  Fn fn_;
};

inline FunctionPredictor accept_all() {
  return FunctionPredictor([](int, int, const SnrGrid&) { return true; });
}

inline FunctionPredictor reject_all() {
  return FunctionPredictor([](int, int, const SnrGrid&) { return false; });
}

// Accepts MCS c iff the weakest position reaches required_db[c].
inline FunctionPredictor min_snr_stub(std::array<double, kNumMcs> required_db) {
  return FunctionPredictor([required_db](int mcs, int, const SnrGrid& g) {
    const double lo = *std::min_element(g.values.begin(), g.values.end());
    return linear_to_db(lo) >= required_db[static_cast<std::size_t>(mcs)];
  });
}

// Highest-rate MCS accepted by the predictor, or kNoTransmission.
inline int select_mcs(const SnrGrid& grid, int streams, const LinkPredictor& predictor) {
  int best = kNoTransmission;
  double best_rate = 0.0;
  for (const McsEntry& e : kMcsTable) {
    if (e.base_rate_mbps <= best_rate) continue;
    if (predictor.accepts(e.id, streams, grid)) {
      best = e.id;
      best_rate = e.base_rate_mbps;
    }
  }
  return best;
}

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["format"] = "mulink-model";
  j["version"] = kModelFormatVersion;
  j["feature_count"] = m.feature_count;
  j["target_fer"] = m.target_fer;
  auto& cs = j["components"] = nlohmann::json::array();
  for (const auto& c : m.components) {
    nlohmann::json e;
    e["mcs"] = c.mcs;
    e["streams"] = c.streams;
    e["flagged"] = c.flagged;
    e["cv_error"] = c.cv_error;
    e["positives"] = c.positives;
    e["negatives"] = c.negatives;
    e["standardization"] = {{"mean", c.scaler.mean}, {"scale", c.scaler.scale}};
    e["svm"] = {{"constant", c.svm.constant}, {"constant_label", c.svm.constant_label},
                {"support", c.svm.support},   {"coef", c.svm.coef},
                {"bias", c.svm.bias},         {"rho", c.svm.rho},
                {"c", c.svm.c}};
    e["avg_snr"] = {{"threshold_linear", c.avg.threshold}, {"training_errors", c.avg.training_errors}};
    e["eff_snr"] = {{"beta", c.eff.beta},
                    {"threshold_linear", c.eff.rule.threshold},
                    {"training_errors", c.eff.rule.training_errors}};
    cs.push_back(std::move(e));
  }
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "mulink-model") throw ConfigError("not a model file");
  if (j.at("version").get<int>() != kModelFormatVersion) throw ConfigError("unsupported model version");
  TrainedModel m;
  m.feature_count = j.at("feature_count").get<int>();
  m.target_fer = j.at("target_fer").get<double>();
  for (const auto& e : j.at("components")) {
    ComponentModel c;
    c.mcs = e.at("mcs").get<int>();
    c.streams = e.at("streams").get<int>();
    c.flagged = e.at("flagged").get<bool>();
    c.cv_error = e.at("cv_error").get<double>();
    c.positives = e.at("positives").get<long>();
    c.negatives = e.at("negatives").get<long>();
    c.scaler.mean = e.at("standardization").at("mean").get<std::vector<double>>();
    c.scaler.scale = e.at("standardization").at("scale").get<std::vector<double>>();
    const auto& s = e.at("svm");
    c.svm.constant = s.at("constant").get<bool>();
    c.svm.constant_label = s.at("constant_label").get<int>();
    c.svm.support = s.at("support").get<std::vector<Feature>>();
    c.svm.coef = s.at("coef").get<std::vector<double>>();
    c.svm.bias = s.at("bias").get<double>();
    c.svm.rho = s.at("rho").get<double>();
    c.svm.c = s.at("c").get<double>();
    if (c.svm.support.size() != c.svm.coef.size()) throw ConfigError("support/coefficient count mismatch");
    c.avg.threshold = e.at("avg_snr").at("threshold_linear").get<double>();
    c.avg.training_errors = e.at("avg_snr").at("training_errors").get<long>();
    c.eff.beta = e.at("eff_snr").at("beta").get<double>();
    c.eff.rule.threshold = e.at("eff_snr").at("threshold_linear").get<double>();
    c.eff.rule.training_errors = e.at("eff_snr").at("training_errors").get<long>();
    m.components.push_back(std::move(c));
  }
  return m;
}

}  // namespace mulink
