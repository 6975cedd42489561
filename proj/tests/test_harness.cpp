#include "mulink/harness/config.hpp"
#include "mulink/harness/dataset.hpp"
#include "mulink/harness/experiment.hpp"
#include "mulink/harness/train.hpp"

#include <catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

using namespace mulink;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.channel.num_carriers = 8;
  c.training.num_levels = 3;
  c.training.snr_min_db = 0.0;
  c.training.snr_max_db = 40.0;
  c.training.channels_per_level = 2;
  c.training.fer_frames = 20;
  return c;
}

// Labels follow the mean dB value; a 4 dB gap around the boundary.
std::vector<TrainingSample> separable_samples(int n, int mcs, Rng& rng) {
  std::vector<TrainingSample> out;
  for (int i = 0; i < n; ++i) {
    const bool good = i % 2 == 0;
    const double centre = good ? uniform(rng, 22.0, 35.0) : uniform(rng, 5.0, 18.0);
    TrainingSample s;
    s.mcs = mcs;
    s.streams = 1;
    s.fer = good ? 0.0 : 0.8;
    s.label = label_for(s.fer, 0.1);
    for (int k = 0; k < 16; ++k) s.snr_db.push_back(centre + uniform(rng, -2.0, 2.0));
    std::sort(s.snr_db.begin(), s.snr_db.end());
    out.push_back(std::move(s));
  }
  return out;
}

int exit_code(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mulink_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("a very strong link is labelled feasible") {
  ExperimentConfig c = tiny_config();
  const SnrGrid g = single_user_grid(c.channel, 1, 4, 60.0, 3);
  CHECK(*std::min_element(g.values.begin(), g.values.end()) > 1e3);
  const FerMeasurement f = simulate_fer(g, 0, c.frame_bytes, 50, 4);
  CHECK(f.fer == 0.0);
  CHECK(label_for(f.fer, c.target_fer) == 1);

  c.training.num_levels = 1;
  c.training.snr_min_db = c.training.snr_max_db = 60.0;
  c.training.channels_per_level = 1;
  c.training.max_streams = 1;
  const auto samples = generate_training_set(c, 0, 1);
  REQUIRE(samples.size() == static_cast<std::size_t>(kNumMcs));
  CHECK(samples[0].mcs == 0);
  CHECK(samples[0].label == 1);
}

TEST_CASE("training links cycle the transmit dimension") {
  std::vector<int> one;
  for (std::size_t ch = 0; ch < 6; ++ch) one.push_back(training_tx_antennas(1, 4, ch));
  CHECK(one == std::vector<int>{1, 2, 3, 4, 1, 2});
  std::vector<int> two;
  for (std::size_t ch = 0; ch < 4; ++ch) two.push_back(training_tx_antennas(2, 4, ch));
  CHECK(two == std::vector<int>{2, 3, 4, 2});
  const ChannelSpec spec = tiny_config().channel;
  CHECK_THROWS_AS(single_user_grid(spec, 2, 1, 10.0, 1), std::invalid_argument);
  // One transmit antenna: a single Rayleigh coefficient per carrier.
  const SnrGrid g = single_user_grid(spec, 1, 1, 0.0, 5);
  CHECK(g.streams == 1);
  CHECK(g.values.size() == static_cast<std::size_t>(spec.num_carriers));
}

TEST_CASE("training set size and determinism") {
  const ExperimentConfig c = tiny_config();
  const auto a = generate_training_set(c, 0, 1);
  CHECK(a.size() == static_cast<std::size_t>(2 * kNumMcs * 3 * 2));
  for (const auto& s : a) {
    CHECK(s.snr_db.size() == static_cast<std::size_t>(s.streams * 8));
    CHECK(s.label == label_for(s.fer, c.target_fer));
  }
  const std::string csv = dataset_to_csv(a, provenance_line(c));
  CHECK(dataset_to_csv(generate_training_set(c, 0, 3), provenance_line(c)) == csv);
  CHECK(dataset_to_csv(generate_training_set(c, 1, 1), provenance_line(c)) != csv);

  const auto back = dataset_from_csv(csv);
  REQUIRE(back.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(back[i].mcs == a[i].mcs);
    CHECK(back[i].streams == a[i].streams);
    CHECK(back[i].fer == a[i].fer);
    CHECK(back[i].label == a[i].label);
    CHECK(back[i].snr_db == a[i].snr_db);
  }
  CHECK(training_levels_db(c.training) == std::vector<double>{0.0, 20.0, 40.0});
}

TEST_CASE("malformed datasets are rejected") {
  CHECK_THROWS_AS(dataset_from_csv(""), ConfigError);
  CHECK_THROWS_AS(dataset_from_csv("a,b,c,d,e\n"), ConfigError);
  CHECK_THROWS_AS(dataset_from_csv("mcs,L,fer,label,snr_1\n0,1,0.5,2,3\n"), ConfigError);
  CHECK_THROWS_AS(dataset_from_csv("mcs,L,fer,label,snr_1,snr_2\n0,1,0.5,1,3,1\n"), ConfigError);
  CHECK_THROWS_AS(dataset_from_csv("mcs,L,fer,label,snr_1\n0,1,x,1,3\n"), ConfigError);
  CHECK(dataset_from_csv("# note\nmcs,L,fer,label,snr_1\n0,1,0.5,-1,3\n").size() == 1);
}

TEST_CASE("separable synthetic data trains to zero held-out error") {
  Rng rng(5);
  auto train = separable_samples(80, 2, rng);
  auto more = separable_samples(80, 4, rng);
  train.insert(train.end(), more.begin(), more.end());
  TrainOptions opt;
  opt.c_grid = {1.0, 16.0};
  opt.rho_grid = {1.0, 4.0};
  const TrainedModel model = train_pipeline(train, opt, 0.1, 2);
  REQUIRE(model.components.size() == 2);

  auto test = separable_samples(100, 2, rng);
  more = separable_samples(100, 4, rng);
  test.insert(test.end(), more.begin(), more.end());
  const auto rows = compare_classifiers(model, test);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.samples == 100);
    CHECK(r.err_svm == 0.0);
    CHECK(r.err_avg == 0.0);
  }
}

TEST_CASE("baseline thresholds minimize training error") {
  Rng rng(6);
  std::vector<TrainingSample> samples;
  for (int i = 0; i < 150; ++i) {
    TrainingSample s;
    s.mcs = 5;
    s.streams = 1;
    for (int k = 0; k < 8; ++k) s.snr_db.push_back(uniform(rng, 0.0, 30.0));
    std::sort(s.snr_db.begin(), s.snr_db.end());
    s.fer = s.snr_db[0] + uniform(rng, -6.0, 6.0) > 8.0 ? 0.0 : 1.0;
    s.label = label_for(s.fer, 0.1);
    samples.push_back(std::move(s));
  }
  TrainOptions opt;
  opt.c_grid = {1.0};
  opt.rho_grid = {2.0};
  const TrainedModel model = train_pipeline(samples, opt, 0.1, 1);
  const ComponentModel& c = model.at(5, 1);

  std::vector<double> means;
  for (const auto& s : samples) means.push_back(mean_snr(sample_grid(s).values));
  auto errors_at = [&](const std::vector<double>& m, double th) {
    long e = 0;
    for (std::size_t i = 0; i < m.size(); ++i) e += ((m[i] >= th ? 1 : -1) != samples[i].label);
    return e;
  };
  long best = errors_at(means, 1e300);
  for (double th : means) best = std::min(best, errors_at(means, th));
  CHECK(c.avg.training_errors == best);
  CHECK(errors_at(means, c.avg.threshold) == best);

  long best_eff = std::numeric_limits<long>::max();
  for (double beta : default_beta_grid()) {
    std::vector<double> m;
    for (const auto& s : samples) m.push_back(eff_snr(sample_grid(s).values, beta));
    best_eff = std::min(best_eff, errors_at(m, 1e300));
    for (double th : m) best_eff = std::min(best_eff, errors_at(m, th));
  }
  CHECK(c.eff.rule.training_errors == best_eff);
}

TEST_CASE("accuracy gain arithmetic") {
  CHECK(accuracy_gain(5.03, 1.65) == Catch::Approx(0.672).margin(5e-4));
  CHECK(std::isnan(accuracy_gain(0.0, 0.0)));
}

TEST_CASE("a one-class test set is classified without error") {
  Rng rng(7);
  auto samples = separable_samples(40, 3, rng);
  for (auto& s : samples) {
    s.fer = 0.0;
    s.label = 1;
  }
  const TrainedModel model = train_pipeline(samples, TrainOptions{}, 0.1, 1);
  CHECK(model.components.front().flagged);
  const auto rows = compare_classifiers(model, samples);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].err_svm == 0.0);
  CHECK(rows[0].err_avg == 0.0);
  CHECK(rows[0].err_eff == 0.0);
  CHECK(comparison_to_csv(rows, "").find("average") != std::string::npos);
}

TEST_CASE("experiment config round trip and validation") {
  ExperimentConfig c;
  c.quantizer = {6, 8, false};
  c.snr_sweep_db = {0.0, 12.5};
  c.classifier = ClassifierKind::EffSnr;
  c.utility = UtilityKind::Log;
  c.seed = 1234567890123ULL;
  c.training.num_levels = 7;
  const nlohmann::json j = config_to_json(c);
  const ExperimentConfig back = config_from_json(nlohmann::json::parse(j.dump()));
  CHECK(config_to_json(back) == j);
  CHECK(config_hash(back) == config_hash(c));
  c.seed = 2;
  CHECK(config_hash(back) != config_hash(c));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"num_trails": 3})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"num_trials": "many"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"target_fer": 1.5})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"classifier": "knn"})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse("[1]")), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  CHECK(config_from_json(nlohmann::json::object()).channel.num_carriers == 16);
}

TEST_CASE("experiment rows satisfy the throughput penalty") {
  ExperimentConfig c = tiny_config();
  c.num_trials = 2;
  c.fer_frames = 20;
  c.snr_sweep_db = {10.0, 40.0};
  const FunctionPredictor stub = min_snr_stub({2.0, 5.0, 8.0, 11.0, 15.0, 19.0, 21.0, 23.0, 27.0});
  const ExperimentResult a = run_experiment(c, stub, 1);
  const ExperimentResult b = run_experiment(c, stub, 2);
  CHECK(results_to_csv(c, a.rows) == results_to_csv(c, b.rows));
  CHECK(summary_to_csv(c, a.summary) == summary_to_csv(c, b.summary));
  REQUIRE(a.rows.size() == 4);
  for (const auto& r : a.rows) {
    REQUIRE(r.ok);
    double sum = 0.0;
    for (const auto& u : r.users) {
      CHECK(u.fer >= 0.0);
      CHECK(u.fer <= 1.0);
      if (u.fer > c.target_fer || !u.accepted) CHECK(u.throughput == 0.0);
      sum += u.throughput;
    }
    CHECK(r.sum_throughput == Catch::Approx(sum));
  }
  CHECK(results_to_csv(c, a.rows).rfind(provenance_line(c), 0) == 0);
}

TEST_CASE("command line interface") {
  const std::string cli = MULINK_CLI_PATH;
  const fs::path dir = scratch("cli");
  const std::string quiet = " > " + (dir / "out.txt").string() + " 2> " + (dir / "err.txt").string();

  CHECK(exit_code(cli + " run --config " + (dir / "missing.json").string() + quiet) == 2);
  CHECK(read_text(dir / "err.txt").find("error kind=config") != std::string::npos);
  CHECK(exit_code(cli + " run --bogus" + quiet) == 2);
  CHECK(exit_code(cli + quiet) == 2);
  write_text(dir / "bad.json", R"({"num_trials": -1})");
  CHECK(exit_code(cli + " train --config " + (dir / "bad.json").string() + quiet) == 2);

  SECTION("leakage check writes one row per bit pair") {
    REQUIRE(exit_code(cli + " leakage-check --out " + dir.string() + quiet) == 0);
    const std::string csv = read_text(dir / "leakage.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("\n4,6,") != std::string::npos);
    CHECK(csv.find("\n5,7,") != std::string::npos);
    CHECK(csv.find("\n6,8,") != std::string::npos);
  }

  SECTION("micro pipeline") {
    write_text(dir / "micro.json", R"({
      "channel": {"num_carriers": 4},
      "num_trials": 3, "fer_frames": 30, "snr_sweep_db": [10, 30],
      "training": {"num_levels": 6, "channels_per_level": 3, "fer_frames": 30}
    })");
    const std::string args = " --config " + (dir / "micro.json").string() + " --out " + dir.string();
    const auto t0 = std::chrono::steady_clock::now();
    REQUIRE(exit_code(cli + " gen-data" + args + quiet) == 0);
    REQUIRE(exit_code(cli + " train" + args + quiet) == 0);
    REQUIRE(exit_code(cli + " run" + args + " --threads 2" + quiet) == 0);
    REQUIRE(exit_code(cli + " compare-classifiers" + args + quiet) == 0);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 300.0);
    CHECK(dataset_from_csv(read_text(dir / "dataset.csv")).size() == 2u * kNumMcs * 6 * 3);
    const std::string first = read_text(dir / "results.csv");
    REQUIRE(exit_code(cli + " run" + args + " --threads 1" + quiet) == 0);
    CHECK(read_text(dir / "results.csv") == first);
    CHECK(fs::exists(dir / "summary.csv"));
    CHECK(fs::exists(dir / "comparison.csv"));
    CHECK(model_from_json(nlohmann::json::parse(read_text(dir / "model.json"))).components.size() ==
          2u * kNumMcs);
  }
}
