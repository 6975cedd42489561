// SPDX-License-Identifier: Apache-2.0
//
// mulink: dataset generation, classifier training, SNR sweeps, classifier
// comparison and the leakage check.
//
//   mulink gen-data            [--config f] [--seed s] [--out dir] [--threads n] [--set train|test]
//   mulink train               ...
//   mulink run                 ...
//   mulink compare-classifiers ...
//   mulink leakage-check       ...
//
// Exit status: 0 ok, 1 runtime failure, 2 usage or configuration error. On
// failure one line "error kind=<usage|config|runtime> message=<json string>"
// goes to stderr.

#include "mulink/mulink.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace mulink;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 0;
  std::string set = "train";
};

int fail(const char* kind, const std::string& msg, int code) {
  std::cerr << "error kind=" << kind << " message=" << nlohmann::json(msg).dump() << '\n';
  return code;
}

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

fs::path out_path(const Options& o, const std::string& name) { return fs::path(o.out) / name; }

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int gen_data(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  Stopwatch sw;
  const bool test = o.set == "test";
  const auto samples = generate_training_set(cfg, test ? 1 : 0, o.threads);
  const auto path = out_path(o, test ? cfg.output.test_dataset : cfg.output.dataset);
  write_text(path, dataset_to_csv(samples, provenance_line(cfg)));
  std::cout << "wrote " << samples.size() << " samples to " << path.string() << " in " << sw.seconds() << " s\n";
  return 0;
}

TrainedModel load_model(const fs::path& path) {
  try {
    return model_from_json(nlohmann::json::parse(read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("model file is not valid JSON: " + std::string(e.what()));
  }
}

int train(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  Stopwatch sw;
  const auto samples = dataset_from_csv(read_text(out_path(o, cfg.output.dataset)));
  const TrainedModel model = train_pipeline(samples, train_options(cfg), cfg.target_fer, o.threads);
  const auto path = out_path(o, cfg.output.model);
  write_text(path, model_to_json(model).dump(1) + "\n");
  int flagged = 0;
  for (const auto& c : model.components) flagged += c.flagged;
  std::cout << "trained " << model.components.size() << " components (" << flagged << " flagged) -> "
            << path.string() << " in " << sw.seconds() << " s\n";
  return 0;
}

int run(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  Stopwatch sw;
  const TrainedModel model = load_model(out_path(o, cfg.output.model));
  const ModelPredictor predictor(model, cfg.classifier);
  const ExperimentResult res = run_experiment(cfg, predictor, o.threads);
  write_text(out_path(o, cfg.output.results), results_to_csv(cfg, res.rows));
  write_text(out_path(o, cfg.output.summary), summary_to_csv(cfg, res.summary));
  std::cout << "snr_db  mean_sum_throughput_mbps  aggregate_fer  scheduled_mode\n";
  for (const auto& r : res.summary)
    std::cout << fmt(r.snr_db) << "  " << fmt(r.mean_sum_throughput) << "  " << fmt(r.aggregate_fer) << "  "
              << r.scheduled_mode << '\n';
  std::cout << "done in " << sw.seconds() << " s\n";
  return 0;
}

int compare(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const TrainedModel model = load_model(out_path(o, cfg.output.model));
  const auto test_path = out_path(o, cfg.output.test_dataset);
  std::vector<TrainingSample> test;
  if (fs::exists(test_path)) {
    test = dataset_from_csv(read_text(test_path));
  } else {
    test = generate_training_set(cfg, 1, o.threads);
    write_text(test_path, dataset_to_csv(test, provenance_line(cfg)));
  }
  const auto rows = compare_classifiers(model, test);
  const std::string csv = comparison_to_csv(rows, provenance_line(cfg));
  write_text(out_path(o, cfg.output.comparison), csv);
  std::cout << csv;
  return 0;
}

int leakage(const Options& o) {
  const ExperimentConfig cfg = resolve_config(o);
  LeakageCheckOptions lo;
  lo.seed = cfg.seed;
  lo.num_tx = cfg.channel.num_tx_antennas;
  const auto rows = leakage_check(lo, o.threads);
  const std::string csv = leakage_to_csv(rows, provenance_line(cfg));
  write_text(out_path(o, cfg.output.leakage), csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Limited-feedback multiuser MIMO-OFDM link adaptation"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)");
    sub->add_option("--seed", o.seed, "master seed override");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--threads", o.threads, "worker threads (0 = hardware)")->check(CLI::NonNegativeNumber);
  };
  auto* g = app.add_subcommand("gen-data", "generate a labelled training or test set");
  add_common(g);
  g->add_option("--set", o.set, "train or test")->check(CLI::IsMember({"train", "test"}));
  auto* t = app.add_subcommand("train", "cross-validate and train classifiers");
  add_common(t);
  auto* r = app.add_subcommand("run", "multiuser SNR sweep");
  add_common(r);
  auto* c = app.add_subcommand("compare-classifiers", "test-set errors of SVM and baselines");
  add_common(c);
  auto* l = app.add_subcommand("leakage-check", "analytical vs empirical leakage");
  add_common(l);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    return fail("usage", e.what(), 2);
  }

  try {
    if (g->parsed()) return gen_data(o);
    if (t->parsed()) return train(o);
    if (r->parsed()) return run(o);
    if (c->parsed()) return compare(o);
    if (l->parsed()) return leakage(o);
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return fail("usage", "no subcommand", 2);
}
