// Copyright 2026 The wpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "wpos/harness.hpp"

using wpos::ExperimentConfig;
namespace harness = wpos::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig config;
    config.scene.sensors =
        wpos::default_sensor_positions(config.scene.d_x, config.scene.d_y, config.scene.d_z);
    config.scenario_seeds = {4242};
    config.snr_db_list = {15.0};
    config.train_records = 160;
    config.test_records = 40;
    config.calibration_samples = 5000;
    config.f_grid = {4, 5};
    config.knn_neighbors = 5;
    config.kl_max_per_zone = 12;
    config.epochs = 1;
    config.repeats = 1;
    config.threads = 2;
    config.validate();
    return config;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name)
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string file_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("config parsing round-trips values and rejects unknown keys")
{
    std::stringstream text;
    text << "schema_version = 1\n"
         << "scene.d_r = 12.5  # widened\n"
         << "zones.rings = 4\n"
         << "zones.sectors = 8\n"
         << "snr_db_list = 5, 10, 15\n"
         << "scenario_seeds = 1, 2, 3\n"
         << "features.f_grid = 4,5,6\n"
         << "models = pnn, toa-rss\n"
         << "channel.los = false\n"
         << "train.epochs = 7\n";
    const ExperimentConfig config = wpos::parse_config_text(text);
    CHECK(config.scene.d_r == 12.5);
    CHECK(config.zone_count() == 32);
    CHECK(config.snr_db_list.size() == 3);
    CHECK(config.scenario_seeds.size() == 3);
    CHECK(config.models.size() == 2);
    CHECK(config.los == false);
    CHECK(config.epochs == 7);
    CHECK(config.effective_epsilon() == 0.6); // blocked path default weight

    std::stringstream bad;
    bad << "scene.dr = 10\n";
    CHECK_THROWS_AS(wpos::parse_config_text(bad), std::invalid_argument);

    std::stringstream dup;
    dup << "scenario_seeds = 5, 5\n";
    CHECK_THROWS_AS(wpos::parse_config_text(dup), std::invalid_argument);
}

TEST_CASE("raw and feature datasets round-trip through disk")
{
    TempDir dir("wpos_dataset_roundtrip");

    wpos::RawDataset raw;
    raw.sensor_count = 2;
    raw.bin_count = 3;
    raw.sigma2 = 1.5e-8;
    raw.nu = 8.0;
    raw.records.push_back({3, 77, {1.0, -2.0, 0.5}, {1, 2, 3, 4, 5, 6}});
    const std::string raw_file = (dir.path / "x.raw").string();
    save_raw_dataset(raw, raw_file);
    const wpos::RawDataset back = wpos::load_raw_dataset(raw_file);
    CHECK(back.sensor_count == 2);
    CHECK(back.sigma2 == raw.sigma2);
    CHECK(back.records.size() == 1);
    CHECK(back.records[0].zone == 3);
    CHECK(back.records[0].powers == raw.records[0].powers);

    wpos::FeatureDataset features;
    features.sensor_count = 2;
    features.feature_count = 2;
    wpos::FeatureRecord r;
    r.scenario_id = 0;
    r.seed = 9;
    r.target = {0.5, 1.0, -0.25};
    r.zone = 6;
    r.sensor_count = 2;
    r.feature_count = 2;
    r.powers = {4.0, 3.0, 2.0, 1.0};
    r.bins = {7.0, 1.0, 0.0, 5.0};
    features.records.push_back(r);
    const std::string f_file = (dir.path / "x.jsonl").string();
    save_feature_dataset(features, f_file);
    const wpos::FeatureDataset fback = wpos::load_feature_dataset(f_file);
    CHECK(fback.records.size() == 1);
    CHECK(fback.records[0].zone == 6);
    CHECK(fback.records[0].powers == r.powers);
    CHECK(fback.records[0].bins == r.bins);
}

TEST_CASE("generation writes the manifest and expected shapes")
{
    TempDir dir("wpos_generate");
    const ExperimentConfig config = small_config();
    const auto result = harness::generate_datasets(config, dir.path.string());

    // 1 scenario x (1 frozen-scenario file + 1 snr x 2 splits x (1 raw + 2 feature files)).
    CHECK(result.files.size() == 7);
    CHECK(fs::exists(result.manifest_path));

    // The frozen environment round-trips.
    const wpos::Scenario scenario =
        wpos::load_scenario((dir.path / "s4242_scenario.json").string());
    CHECK(scenario.sensor_shadow.size() == 12);
    CHECK(scenario.path_shadow.size() == scenario.path_count());

    const auto raw = wpos::load_raw_dataset(
        harness::raw_path(dir.path.string(), 4242, 15.0, true, "train"));
    CHECK(raw.records.size() == 160);
    CHECK(raw.sensor_count == 12);
    CHECK(raw.bin_count == 100);
    for (const auto& record : raw.records) {
        CHECK(record.zone >= 0);
        CHECK(record.zone < config.zone_count());
        CHECK(record.powers.size() == 1200);
        for (double p : record.powers) CHECK(p >= 0.0);
    }

    const auto features = wpos::load_feature_dataset(
        harness::feature_path(dir.path.string(), 4242, 15.0, true, "train", 5));
    CHECK(features.records.size() == 160);
    CHECK(features.records[0].feature_size() == 2 * 5 * 12);
    // Feature records align with the raw records they were cut from.
    for (std::size_t i = 0; i < features.records.size(); ++i) {
        CHECK(features.records[i].zone == raw.records[i].zone);
        CHECK(features.records[i].seed == raw.records[i].seed);
    }

    // Manifest reaches every file.
    std::ifstream in(result.manifest_path);
    nlohmann::json manifest;
    in >> manifest;
    std::size_t listed = 0;
    for (const auto& entry : manifest.at("scenarios")) {
        CHECK(fs::exists(dir.path / entry.at("scenario_file").get<std::string>()));
        ++listed;
        for (const auto& file : entry.at("files")) {
            CHECK(fs::exists(dir.path / file.at("path").get<std::string>()));
            ++listed;
        }
    }
    CHECK(listed == result.files.size());
}

TEST_CASE("generation is byte-identical across runs and thread counts")
{
    TempDir dir_a("wpos_gen_a"), dir_b("wpos_gen_b"), dir_c("wpos_gen_c");
    ExperimentConfig config = small_config();
    config.train_records = 60;
    config.test_records = 20;

    harness::generate_datasets(config, dir_a.path.string());
    harness::generate_datasets(config, dir_b.path.string());
    ExperimentConfig single = config;
    single.threads = 1;
    harness::generate_datasets(single, dir_c.path.string());

    for (const auto& entry : fs::directory_iterator(dir_a.path)) {
        const auto name = entry.path().filename();
        CAPTURE(name.string());
        CHECK(file_bytes(entry.path()) == file_bytes(dir_b.path / name));
        if (name != "manifest.json") // manifest echoes the thread count
            CHECK(file_bytes(entry.path()) == file_bytes(dir_c.path / name));
    }
}

TEST_CASE("blocked-path datasets leave the direct arrival bin at noise level")
{
    TempDir dir("wpos_nlos");
    ExperimentConfig config = small_config();
    config.los = false;
    config.train_records = 400;
    config.f_grid = {4};
    harness::generate_datasets(config, dir.path.string());

    const auto raw = wpos::load_raw_dataset(
        harness::raw_path(dir.path.string(), 4242, 15.0, false, "train"));
    const double nu = raw.nu;

    // Pool the direct-arrival bins across records and sensors.
    std::vector<double> los_bins;
    for (const auto& record : raw.records) {
        for (int m = 0; m < raw.sensor_count; ++m) {
            const double d = wpos::distance(record.target, config.scene.sensors[m]);
            const int bin = static_cast<int>((d / config.scene.c) / config.detection.bin_ns);
            los_bins.push_back(record.powers[static_cast<std::size_t>(m) * raw.bin_count + bin]);
        }
    }
    const double psi2 = raw.sigma2 / nu;
    const double p = oracles::ks_p_value(
        los_bins, [psi2, nu](double x) { return wpos::chi2_cdf_scaled(x, psi2, nu); });
    CHECK(p > 0.01);
}

TEST_CASE("selection runs end-to-end on generated data")
{
    TempDir dir("wpos_select");
    ExperimentConfig config = small_config();
    config.train_records = 320;
    harness::generate_datasets(config, dir.path.string());

    const std::string csv = (dir.path / "selection.csv").string();
    const auto report = harness::select_f(config, dir.path.string(), 4242, 15.0, csv);
    CHECK(report.tables.rows.size() == 2);
    CHECK(report.tables.f_star >= 4);
    CHECK(report.tables.f_star <= 5);
    CHECK(fs::exists(csv));

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("f,psi2", 0) == 0);
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);

    ExperimentConfig gapped = config;
    gapped.f_grid = {4, 6};
    CHECK_THROWS_AS(harness::select_f(gapped, dir.path.string(), 4242, 15.0, ""),
                    std::invalid_argument);
}

TEST_CASE("training cells produce metrics and deterministic reruns")
{
    TempDir data("wpos_train_data"), runs_a("wpos_runs_a"), runs_b("wpos_runs_b");
    ExperimentConfig config = small_config();
    config.train_records = 200;
    config.test_records = 60;
    config.epochs = 2;
    harness::generate_datasets(config, data.path.string());

    harness::TrainEvalOptions options;
    options.models = {"pnn", "toa-rss"};
    options.f_values = {4};
    options.repeats = 2;
    options.save_models = false;

    const auto cells_a = harness::train_eval(config, data.path.string(), runs_a.path.string(),
                                             options);
    CHECK(cells_a.size() == 4); // (pnn F=4 + toa-rss) x 2 repeats
    for (const auto& cell : cells_a) {
        CHECK(cell.rate_percent >= 0.0);
        CHECK(cell.rate_percent <= 100.0);
        if (cell.model == "pnn") CHECK(cell.feature_dim == 2 * 4 * 12);
        if (cell.model == "toa-rss") CHECK(cell.feature_dim == 24);
    }

    harness::train_eval(config, data.path.string(), runs_b.path.string(), options);
    CHECK(file_bytes(runs_a.path / "metrics.csv") == file_bytes(runs_b.path / "metrics.csv"));
    CHECK(file_bytes(runs_a.path / "summary.csv") == file_bytes(runs_b.path / "summary.csv"));

    // The metrics table reads back losslessly for reporting.
    const auto parsed = harness::read_metrics_table((runs_a.path / "metrics.csv").string());
    CHECK(parsed.size() == cells_a.size());
    std::stringstream report;
    harness::print_report((runs_a.path / "metrics.csv").string(), report);
    CHECK(report.str().find("pnn") != std::string::npos);
}

TEST_CASE("random labels train to chance level")
{
    TempDir dir("wpos_random_labels");
    ExperimentConfig config = small_config();
    config.train_records = 400;
    config.test_records = 400;
    config.f_grid = {4};
    config.epochs = 2;
    harness::generate_datasets(config, dir.path.string());

    const auto features = wpos::load_feature_dataset(
        harness::feature_path(dir.path.string(), 4242, 15.0, true, "train", 4));
    const auto stats = wpos::fit_normalization(features.records);
    wpos::nn::LabeledData data = harness::features_to_data(features, stats);

    wpos::RandomStream rng(97);
    for (int& label : data.labels)
        label = static_cast<int>(rng.uniform() * config.zone_count());

    wpos::nn::ModelSpec spec = wpos::build_pnn(12, 4, config.zone_count());
    spec.init_seed = 98;
    spec.batch_size = 64;
    wpos::nn::Model model(spec);
    wpos::nn::TrainOptions options;
    options.epochs = 2;
    options.val_fraction = 0.0;
    options.shuffle_seed = 99;
    wpos::nn::train(model, data, options);

    const auto test_features = wpos::load_feature_dataset(
        harness::feature_path(dir.path.string(), 4242, 15.0, true, "test", 4));
    wpos::nn::LabeledData test = harness::features_to_data(test_features, stats);
    for (int& label : test.labels)
        label = static_cast<int>(rng.uniform() * config.zone_count());

    const double rate = 100.0 * wpos::nn::accuracy(model, test);
    CHECK(std::fabs(rate - 100.0 / config.zone_count()) <= 3.0);
}

TEST_CASE("checkpoints evaluate to the recorded rate")
{
    TempDir data("wpos_ckpt_data"), runs("wpos_ckpt_runs");
    ExperimentConfig config = small_config();
    config.train_records = 150;
    config.test_records = 50;
    config.epochs = 1;
    harness::generate_datasets(config, data.path.string());

    harness::TrainEvalOptions options;
    options.models = {"pnn"};
    options.f_values = {5};
    options.repeats = 1;
    options.save_models = true;
    const auto cells = harness::train_eval(config, data.path.string(), runs.path.string(),
                                           options);
    REQUIRE(cells.size() == 1);

    std::string checkpoint;
    for (const auto& entry : fs::directory_iterator(runs.path / "models"))
        if (entry.path().extension() == ".wpnn") checkpoint = entry.path().string();
    REQUIRE_FALSE(checkpoint.empty());

    const double rate =
        harness::evaluate_checkpoint(checkpoint, data.path.string(), config, "test");
    CHECK(rate == doctest::Approx(cells[0].rate_percent).epsilon(1e-9));
}

TEST_CASE("the built-in example reproduces the reference table")
{
    const auto result = harness::run_reference_example(0.5);
    REQUIRE(result.tables.rows.size() == 6);
    CHECK(result.tables.f_star == 5);
    const std::vector<double> printed{0.79, 0.76, 0.89, 0.88, 0.87, 0.85};
    for (std::size_t i = 0; i < printed.size(); ++i)
        CHECK(result.criterion.criterion[i] == doctest::Approx(printed[i]).epsilon(0.02));

    std::stringstream out;
    harness::print_reference_example(out);
    CHECK(out.str().find("selected feature size: 5") != std::string::npos);
}
