// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration (JSON, units in field names) and helpers shared by
// the harness stages.
#pragma once

#include "mulink/adaptation/model.hpp"
#include "mulink/channel.hpp"
#include "mulink/feedback.hpp"
#include "mulink/scheduler.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mulink {

struct TrainingConfig {
  double snr_min_db = -10.0;
  double snr_max_db = 50.0;
  int num_levels = 30;
  int channels_per_level = 10;
  int fer_frames = 200;
  int max_streams = 2;
  int feature_count = kDefaultFeatureCount;
  int folds = 4;
};

struct OutputPaths {
  std::string dataset = "dataset.csv";
  std::string test_dataset = "test_dataset.csv";
  std::string model = "model.json";
  std::string results = "results.csv";
  std::string summary = "summary.csv";
  std::string comparison = "comparison.csv";
  std::string leakage = "leakage.csv";
};

struct ExperimentConfig {
  ChannelSpec channel{4, {2, 2, 2}, 16, {0.25, 0.25, 0.25, 0.25}, 1.0, 0.0};
  QuantizerConfig quantizer{5, 7, false};
  bool interference_estimation = true;
  double target_fer = 0.1;
  int frame_bytes = 128;
  int num_trials = 50;
  int fer_frames = 200;
  std::vector<double> snr_sweep_db{5, 10, 15, 20, 25, 30, 35, 40, 45};
  ClassifierKind classifier = ClassifierKind::Svm;
  UtilityKind utility = UtilityKind::Sum;
  bool strict_improvement = false;
  std::uint64_t seed = 1;
  TrainingConfig training;
  OutputPaths output;

  void validate() const {
    try {
      channel.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("channel: ") + e.what());
    }
    try {
      quantizer.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("quantizer: ") + e.what());
    }
    if (!(target_fer > 0.0 && target_fer < 1.0)) throw ConfigError("target_fer must lie in (0, 1)");
    if (frame_bytes <= 0) throw ConfigError("frame_bytes must be positive");
    if (num_trials <= 0) throw ConfigError("num_trials must be positive");
    if (fer_frames <= 0) throw ConfigError("fer_frames must be positive");
    if (snr_sweep_db.empty()) throw ConfigError("snr_sweep_db must not be empty");
    const auto& t = training;
    if (t.num_levels < 1 || t.channels_per_level < 1 || t.fer_frames < 1)
      throw ConfigError("training counts must be positive");
    if (t.snr_max_db < t.snr_min_db) throw ConfigError("training SNR range is inverted");
    if (t.max_streams < 1 || t.max_streams > channel.num_tx_antennas)
      throw ConfigError("training max_streams must lie in [1, num_tx_antennas]");
    if (t.feature_count < 2 || t.feature_count > channel.num_carriers)
      throw ConfigError("feature_count must lie in [2, num_carriers]");
    if (t.folds < 2) throw ConfigError("folds must be at least 2");
  }

  // Proportional rate scale for reduced carrier counts.
  double rate_scale() const { return channel.num_carriers / 52.0; }
};

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["channel"] = {{"num_tx_antennas", c.channel.num_tx_antennas},
                  {"num_rx_antennas", c.channel.num_rx_antennas},
                  {"num_carriers", c.channel.num_carriers},
                  {"tap_power_linear", c.channel.tap_power},
                  {"rx_correlation", c.channel.rx_correlation}};
  j["quantizer"] = {{"perfect_csi", c.quantizer.bypass},
                    {"b_psi_bits", c.quantizer.b_psi},
                    {"b_phi_bits", c.quantizer.b_phi}};
  j["interference_estimation"] = c.interference_estimation;
  j["target_fer"] = c.target_fer;
  j["frame_bytes"] = c.frame_bytes;
  j["num_trials"] = c.num_trials;
  j["fer_frames"] = c.fer_frames;
  j["snr_sweep_db"] = c.snr_sweep_db;
  j["classifier"] = classifier_name(c.classifier);
  j["utility"] = c.utility == UtilityKind::Sum ? "sum" : "log";
  j["strict_improvement"] = c.strict_improvement;
  j["seed"] = c.seed;
  j["training"] = {{"snr_min_db", c.training.snr_min_db},
                   {"snr_max_db", c.training.snr_max_db},
                   {"num_levels", c.training.num_levels},
                   {"channels_per_level", c.training.channels_per_level},
                   {"fer_frames", c.training.fer_frames},
                   {"max_streams", c.training.max_streams},
                   {"feature_count", c.training.feature_count},
                   {"folds", c.training.folds}};
  j["output"] = {{"dataset", c.output.dataset},       {"test_dataset", c.output.test_dataset},
                 {"model", c.output.model},           {"results", c.output.results},
                 {"summary", c.output.summary},       {"comparison", c.output.comparison},
                 {"leakage", c.output.leakage}};
  return j;
}

// Missing fields keep their defaults; present fields must have the right type.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::vector<std::string> known{"channel",    "quantizer",   "interference_estimation",
                                                "target_fer", "frame_bytes", "num_trials",
                                                "fer_frames", "snr_sweep_db", "classifier",
                                                "utility",    "strict_improvement", "seed",
                                                "training",   "output"};
    for (const auto& [k, v] : j.items())
      if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config field: " + k);
    auto get = [](const nlohmann::json& o, const char* key, auto& dst) {
      if (o.contains(key)) dst = o.at(key).get<std::decay_t<decltype(dst)>>();
    };
    if (j.contains("channel")) {
      const auto& ch = j.at("channel");
      get(ch, "num_tx_antennas", c.channel.num_tx_antennas);
      get(ch, "num_rx_antennas", c.channel.num_rx_antennas);
      get(ch, "num_carriers", c.channel.num_carriers);
      get(ch, "tap_power_linear", c.channel.tap_power);
      get(ch, "rx_correlation", c.channel.rx_correlation);
    }
    if (j.contains("quantizer")) {
      const auto& q = j.at("quantizer");
      get(q, "perfect_csi", c.quantizer.bypass);
      get(q, "b_psi_bits", c.quantizer.b_psi);
      get(q, "b_phi_bits", c.quantizer.b_phi);
    }
    get(j, "interference_estimation", c.interference_estimation);
    get(j, "target_fer", c.target_fer);
    get(j, "frame_bytes", c.frame_bytes);
    get(j, "num_trials", c.num_trials);
    get(j, "fer_frames", c.fer_frames);
    get(j, "snr_sweep_db", c.snr_sweep_db);
    if (j.contains("classifier")) c.classifier = parse_classifier(j.at("classifier").get<std::string>());
    if (j.contains("utility")) {
      const auto u = j.at("utility").get<std::string>();
      if (u == "sum") {
        c.utility = UtilityKind::Sum;
      } else if (u == "log") {
        c.utility = UtilityKind::Log;
      } else {
        throw ConfigError("unknown utility: " + u);
      }
    }
    get(j, "strict_improvement", c.strict_improvement);
    get(j, "seed", c.seed);
    if (j.contains("training")) {
      const auto& t = j.at("training");
      get(t, "snr_min_db", c.training.snr_min_db);
      get(t, "snr_max_db", c.training.snr_max_db);
      get(t, "num_levels", c.training.num_levels);
      get(t, "channels_per_level", c.training.channels_per_level);
      get(t, "fer_frames", c.training.fer_frames);
      get(t, "max_streams", c.training.max_streams);
      get(t, "feature_count", c.training.feature_count);
      get(t, "folds", c.training.folds);
    }
    if (j.contains("output")) {
      const auto& o = j.at("output");
      get(o, "dataset", c.output.dataset);
      get(o, "test_dataset", c.output.test_dataset);
      get(o, "model", c.output.model);
      get(o, "results", c.output.results);
      get(o, "summary", c.output.summary);
      get(o, "comparison", c.output.comparison);
      get(o, "leakage", c.output.leakage);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(c).dump())));
  return buf;
}

inline std::string provenance_line(const ExperimentConfig& c) {
  return "# config_hash=" + config_hash(c) + " seed=" + std::to_string(c.seed);
}

// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mulink
