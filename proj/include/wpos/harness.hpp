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

#ifndef WPOS_HARNESS_HPP
#define WPOS_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "wpos/config.hpp"
#include "wpos/dataset.hpp"
#include "wpos/features.hpp"
#include "wpos/models.hpp"
#include "wpos/nn.hpp"
#include "wpos/nn_io.hpp"
#include "wpos/parallel.hpp"
#include "wpos/pdp.hpp"
#include "wpos/selection.hpp"

namespace wpos::harness {

// Stream-derivation tags; distinct purposes must never share a tag path.
inline constexpr std::uint64_t kScenarioTag = 1;
inline constexpr std::uint64_t kTrainSplitTag = 2;
inline constexpr std::uint64_t kTestSplitTag = 3;
inline constexpr std::uint64_t kCalibrationSeed = 0x5eedca11b8a7e0ULL;

inline std::uint64_t snr_key(double snr_db)
{
    return static_cast<std::uint64_t>(std::llround(snr_db * 1000.0) + (1LL << 40));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags)
{
    std::uint64_t acc = root;
    for (std::uint64_t tag : tags) {
        std::uint64_t mixer = acc ^ (tag + 0x9e3779b97f4a7c15ULL);
        acc = splitmix64(mixer);
    }
    return acc;
}

inline std::string format_snr(double snr_db)
{
    char text[32];
    std::snprintf(text, sizeof(text), "%g", snr_db);
    return text;
}

inline std::string dataset_stem(std::uint64_t scenario_seed, double snr_db, bool los,
                                const std::string& split)
{
    return "s" + std::to_string(scenario_seed) + "_snr" + format_snr(snr_db) + "_"
           + (los ? "los" : "nlos") + "_" + split;
}

inline std::string raw_path(const std::string& dir, std::uint64_t scenario_seed, double snr_db,
                            bool los, const std::string& split)
{
    return (std::filesystem::path(dir) / (dataset_stem(scenario_seed, snr_db, los, split) + ".raw"))
        .string();
}

inline std::string feature_path(const std::string& dir, std::uint64_t scenario_seed,
                                double snr_db, bool los, const std::string& split, int f)
{
    return (std::filesystem::path(dir)
            / (dataset_stem(scenario_seed, snr_db, los, split) + "_F" + std::to_string(f)
               + ".jsonl"))
        .string();
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

struct GenerateResult {
    std::vector<std::string> files;
    long long frame_redraws = 0;
    double mean_los_gain = 0.0;
    std::map<double, double> sigma2_by_snr;
    std::string manifest_path;
};

/// Freezes one scenario per seed, synthesizes train/test frames for every
/// SNR, and writes raw profiles, per-F feature files, the frozen scenario,
/// and a manifest. Records use individually derived streams, so output bytes
/// do not depend on the thread count.
inline GenerateResult generate_datasets(const ExperimentConfig& config, const std::string& out_dir,
                                        bool export_csv = false)
{
    config.validate();
    std::filesystem::create_directories(out_dir);
    const ZoneLayout layout = config.zone_layout();
    const int sensors = static_cast<int>(config.scene.sensor_count());
    const int bins = config.detection.bin_count();
    const double nu = config.detection.dof();
    const double window_ns = bins * config.detection.bin_ns;

    GenerateResult result;
    result.mean_los_gain = mean_los_pathloss(config.channel, config.scene,
                                             config.calibration_samples, kCalibrationSeed);

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["kind"] = "manifest";
    manifest["config"] = config_to_json(config);
    manifest["calibration"] = {{"seed", kCalibrationSeed},
                               {"samples", config.calibration_samples},
                               {"mean_los_gain", result.mean_los_gain}};
    nlohmann::ordered_json scenario_entries = nlohmann::ordered_json::array();

    for (std::size_t scenario_index = 0; scenario_index < config.scenario_seeds.size();
         ++scenario_index) {
        const std::uint64_t scenario_seed = config.scenario_seeds[scenario_index];
        RandomStream scenario_rng(derive_seed(scenario_seed, {kScenarioTag}));
        const Scenario scenario = generate_scenario(config.channel, config.scene, config.los,
                                                    scenario_rng, window_ns);
        const std::string scenario_file = "s" + std::to_string(scenario_seed) + "_scenario.json";
        save_scenario(scenario, (std::filesystem::path(out_dir) / scenario_file).string());
        result.files.push_back((std::filesystem::path(out_dir) / scenario_file).string());

        nlohmann::ordered_json entry;
        entry["seed"] = scenario_seed;
        entry["clusters"] = scenario.clusters.size();
        entry["scenario_file"] = scenario_file;
        nlohmann::ordered_json file_entries = nlohmann::ordered_json::array();
        std::atomic<long long> redraws{0};

        for (double snr_db : config.snr_db_list) {
            const double sigma2 = noise_level(result.mean_los_gain, snr_db);
            result.sigma2_by_snr[snr_db] = sigma2;
            DetectionParams detection = config.detection;
            detection.snr_db = snr_db;

            const std::pair<std::uint64_t, int> splits[] = {
                {kTrainSplitTag, config.train_records}, {kTestSplitTag, config.test_records}};
            for (const auto& [split_tag, record_count] : splits) {
                const std::string split = (split_tag == kTrainSplitTag) ? "train" : "test";

                RawDataset raw;
                raw.sensor_count = sensors;
                raw.bin_count = bins;
                raw.sigma2 = sigma2;
                raw.nu = nu;
                raw.records.resize(record_count);

                parallel_for(record_count, config.threads, [&](std::size_t i) {
                    const std::uint64_t record_seed =
                        derive_seed(scenario_seed, {split_tag, snr_key(snr_db), i});
                    RandomStream rng(record_seed);
                    RawRecord& record = raw.records[i];
                    record.seed = record_seed;
                    record.target = sample_target_location(config.scene, rng);
                    record.zone = zone_of(layout, record.target);
                    int frame_redraws = 0;
                    const auto frames = measure_frame(config.scene, scenario, config.channel,
                                                      detection, sigma2, record.target, rng,
                                                      &frame_redraws);
                    if (frame_redraws > 0) redraws += frame_redraws;
                    record.powers.reserve(static_cast<std::size_t>(sensors) * bins);
                    for (const PdpVector& frame : frames)
                        record.powers.insert(record.powers.end(), frame.begin(), frame.end());
                });

                const std::string stem = dataset_stem(scenario_seed, snr_db, config.los, split);
                const std::string raw_file = raw_path(out_dir, scenario_seed, snr_db, config.los,
                                                      split);
                save_raw_dataset(raw, raw_file);
                result.files.push_back(raw_file);
                if (export_csv) export_raw_csv(raw, raw_file + ".csv");
                file_entries.push_back({{"path", stem + ".raw"},
                                        {"split", split},
                                        {"snr_db", snr_db},
                                        {"records", record_count}});

                for (int f : config.f_grid) {
                    FeatureDataset features;
                    features.sensor_count = sensors;
                    features.feature_count = f;
                    features.records.reserve(record_count);
                    std::vector<PdpVector> frames(sensors);
                    for (const RawRecord& record : raw.records) {
                        for (int m = 0; m < sensors; ++m)
                            frames[m].assign(
                                record.powers.begin() + static_cast<std::ptrdiff_t>(m) * bins,
                                record.powers.begin() + static_cast<std::ptrdiff_t>(m + 1) * bins);
                        FeatureRecord fr = make_feature_record(frames, f);
                        fr.scenario_id = static_cast<std::int32_t>(scenario_index);
                        fr.seed = record.seed;
                        fr.target = record.target;
                        fr.zone = record.zone;
                        features.records.push_back(std::move(fr));
                    }
                    const std::string f_file =
                        feature_path(out_dir, scenario_seed, snr_db, config.los, split, f);
                    save_feature_dataset(features, f_file);
                    result.files.push_back(f_file);
                    file_entries.push_back({{"path", stem + "_F" + std::to_string(f) + ".jsonl"},
                                            {"split", split},
                                            {"snr_db", snr_db},
                                            {"f", f},
                                            {"records", record_count}});
                }
            }
        }
        entry["frame_redraws"] = redraws.load();
        entry["files"] = file_entries;
        scenario_entries.push_back(entry);
        result.frame_redraws += redraws.load();
    }
    manifest["scenarios"] = scenario_entries;

    result.manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
    std::ofstream out(result.manifest_path);
    if (!out) throw std::runtime_error("harness: cannot write manifest");
    out << manifest.dump(2) << '\n';
    return result;
}

// ---------------------------------------------------------------------------
// select-f
// ---------------------------------------------------------------------------

/// Mean ordered-power vector over all sensors and records of a raw dataset.
inline std::vector<double> mean_ordered_powers(const RawDataset& raw)
{
    const int bins = raw.bin_count;
    std::vector<double> accumulator(bins, 0.0);
    std::vector<double> frame(bins);
    std::size_t frames = 0;
    for (const RawRecord& record : raw.records) {
        for (int m = 0; m < raw.sensor_count; ++m) {
            frame.assign(record.powers.begin() + static_cast<std::ptrdiff_t>(m) * bins,
                         record.powers.begin() + static_cast<std::ptrdiff_t>(m + 1) * bins);
            std::sort(frame.begin(), frame.end(), std::greater<double>());
            for (int n = 0; n < bins; ++n) accumulator[n] += frame[n];
            ++frames;
        }
    }
    if (frames == 0) throw std::invalid_argument("harness: empty dataset");
    for (double& x : accumulator) x /= static_cast<double>(frames);
    return accumulator;
}

/// Normalized per-zone sample vectors (dimension 2FM) for the divergence
/// term, capped per zone for tractability.
inline std::vector<std::vector<std::vector<double>>>
zone_feature_samples(const FeatureDataset& features, int zones, int max_per_zone)
{
    const NormalizationStats stats = fit_normalization(features.records);
    std::vector<std::vector<std::vector<double>>> grouped(zones);
    for (const FeatureRecord& record : features.records) {
        if (record.zone < 0 || record.zone >= zones)
            throw std::invalid_argument("harness: zone label outside the layout");
        auto& bucket = grouped[record.zone];
        if (max_per_zone > 0 && static_cast<int>(bucket.size()) >= max_per_zone) continue;
        const auto [e, b] = assemble_matrices(record, stats);
        std::vector<double> v;
        v.reserve(e.size() + b.size());
        v.insert(v.end(), e.begin(), e.end());
        v.insert(v.end(), b.begin(), b.end());
        bucket.push_back(std::move(v));
    }
    return grouped;
}

struct SelectReport {
    SelectionTables tables;
    int f_min = 0;
    int f_max = 0;
    double epsilon = 0.0;
    std::string csv_path;
};

inline std::string join_values(const std::vector<double>& xs, const char* fmt = "%.6g")
{
    std::string text;
    char cell[64];
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::snprintf(cell, sizeof(cell), fmt, xs[i]);
        if (i) text += '|';
        text += cell;
    }
    return text;
}

inline void write_selection_csv(const SelectionTables& tables, int f_star,
                                const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("harness: cannot write " + path);
    out << "f,psi2,lambdas,ll_gain,p_th,exceed_probs,info_weight,kl,term_a,term_b,criterion,"
           "is_f_star\n";
    char line[256];
    for (const SelectionRow& row : tables.rows) {
        std::snprintf(line, sizeof(line), "%d,%.9e,", row.signal_bins, row.psi2);
        out << line << join_values(row.lambdas) << ',';
        std::snprintf(line, sizeof(line), "%.6f,%.9e,", row.ll_gain, row.threshold);
        out << line << join_values(row.exceed_probs, "%.4f") << ',';
        std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.6f,%.6f,%d\n", row.info_weight,
                      row.kl, row.term_a, row.term_b, row.criterion,
                      row.signal_bins == f_star ? 1 : 0);
        out << line;
    }
}

/// Runs the feature-size selection on one generated dataset (training split).
inline SelectReport select_f(const ExperimentConfig& config, const std::string& data_dir,
                             std::uint64_t scenario_seed, double snr_db,
                             const std::string& out_csv)
{
    config.validate();
    SelectionConfig sel;
    sel.f_min = *std::min_element(config.f_grid.begin(), config.f_grid.end());
    sel.f_max = *std::max_element(config.f_grid.begin(), config.f_grid.end());
    if (static_cast<int>(config.f_grid.size()) != sel.f_max - sel.f_min + 1)
        throw std::invalid_argument("harness: selection needs a contiguous feature grid");
    sel.nu = config.detection.dof();
    sel.epsilon_weight = config.effective_epsilon();
    sel.knn_neighbors = config.knn_neighbors;
    sel.dim_factor = config.kl_dim_factor;
    sel.sensor_count = static_cast<int>(config.scene.sensor_count());

    const RawDataset raw =
        load_raw_dataset(raw_path(data_dir, scenario_seed, snr_db, config.los, "train"));
    const std::vector<double> mean_ordered = mean_ordered_powers(raw);

    std::vector<std::vector<std::vector<std::vector<double>>>> per_f;
    for (int f = sel.f_min; f <= sel.f_max; ++f) {
        const FeatureDataset features = load_feature_dataset(
            feature_path(data_dir, scenario_seed, snr_db, config.los, "train", f));
        per_f.push_back(
            zone_feature_samples(features, config.zone_count(), config.kl_max_per_zone));
    }

    SelectReport report;
    report.tables = select_feature_size(mean_ordered, per_f, sel);
    report.f_min = sel.f_min;
    report.f_max = sel.f_max;
    report.epsilon = sel.epsilon_weight;
    if (!out_csv.empty()) {
        write_selection_csv(report.tables, report.tables.f_star, out_csv);
        report.csv_path = out_csv;
    }
    return report;
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

inline nn::LabeledData features_to_data(const FeatureDataset& features,
                                        const NormalizationStats& stats)
{
    const int n = static_cast<int>(features.records.size());
    const int m = features.sensor_count;
    const int f = features.feature_count;
    nn::LabeledData data;
    data.e = nn::Tensor(n, 1, m, f);
    data.b = nn::Tensor(n, 1, m, f);
    data.labels.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto [e, b] = assemble_matrices(features.records[i], stats);
        std::copy(e.begin(), e.end(), data.e.v.begin() + static_cast<std::ptrdiff_t>(i) * m * f);
        std::copy(b.begin(), b.end(), data.b.v.begin() + static_cast<std::ptrdiff_t>(i) * m * f);
        data.labels.push_back(features.records[i].zone);
    }
    return data;
}

inline nn::LabeledData raw_to_profile_data(const RawDataset& raw, const ScalarStats& stats)
{
    const int n = static_cast<int>(raw.records.size());
    nn::LabeledData data;
    data.e = nn::Tensor(n, 1, raw.sensor_count, raw.bin_count);
    data.labels.reserve(n);
    const int stride = raw.sensor_count * raw.bin_count;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < stride; ++j)
            data.e.v[static_cast<std::size_t>(i) * stride + j] =
                stats.apply(raw.records[i].powers[j]);
        data.labels.push_back(raw.records[i].zone);
    }
    return data;
}

inline nn::LabeledData raw_to_toa_rss_data(const RawDataset& raw, const ScalarStats& toa_stats,
                                           const ScalarStats& rss_stats)
{
    const int n = static_cast<int>(raw.records.size());
    const int m = raw.sensor_count;
    nn::LabeledData data;
    data.e = nn::Tensor(n, 1, 1, 2 * m);
    data.labels.reserve(n);
    std::vector<PdpVector> frames(m);
    for (int i = 0; i < n; ++i) {
        const RawRecord& record = raw.records[i];
        for (int s = 0; s < m; ++s)
            frames[s].assign(record.powers.begin() + static_cast<std::ptrdiff_t>(s) * raw.bin_count,
                             record.powers.begin()
                                 + static_cast<std::ptrdiff_t>(s + 1) * raw.bin_count);
        const std::vector<double> v = toa_rss_vector(frames, raw.sigma2, raw.nu);
        for (int s = 0; s < m; ++s) {
            data.e.v[static_cast<std::size_t>(i) * 2 * m + s] = toa_stats.apply(v[s]);
            data.e.v[static_cast<std::size_t>(i) * 2 * m + m + s] = rss_stats.apply(v[m + s]);
        }
        data.labels.push_back(record.zone);
    }
    return data;
}

inline ScalarStats fit_raw_power_stats(const RawDataset& raw)
{
    std::vector<const std::vector<double>*> columns;
    columns.reserve(raw.records.size());
    for (const RawRecord& r : raw.records) columns.push_back(&r.powers);
    return fit_scalar_stats(columns);
}

inline std::pair<ScalarStats, ScalarStats> fit_toa_rss_stats(const RawDataset& raw)
{
    const int m = raw.sensor_count;
    std::vector<double> toa_col, rss_col;
    std::vector<PdpVector> frames(m);
    for (const RawRecord& record : raw.records) {
        for (int s = 0; s < m; ++s)
            frames[s].assign(record.powers.begin() + static_cast<std::ptrdiff_t>(s) * raw.bin_count,
                             record.powers.begin()
                                 + static_cast<std::ptrdiff_t>(s + 1) * raw.bin_count);
        const std::vector<double> v = toa_rss_vector(frames, raw.sigma2, raw.nu);
        toa_col.insert(toa_col.end(), v.begin(), v.begin() + m);
        rss_col.insert(rss_col.end(), v.begin() + m, v.end());
    }
    return {fit_scalar_stats({&toa_col}), fit_scalar_stats({&rss_col})};
}

struct CellResult {
    std::uint64_t scenario_seed = 0;
    double snr_db = 0.0;
    bool los = true;
    std::string model;
    int f = 0; // 0 for models that ignore the feature count
    int repeat = 0;
    std::uint64_t run_seed = 0;
    double rate_percent = 0.0;
    int feature_dim = 0;
    double wall_seconds = 0.0;
};

inline std::uint64_t model_tag(const std::string& name)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return h;
}

/// Trains and evaluates one (scenario, snr, model, f, repeat) cell. The
/// checkpoint and its sidecar metadata are written when a directory is given.
inline CellResult run_cell(const ExperimentConfig& config, const std::string& data_dir,
                           std::uint64_t scenario_seed, double snr_db, ModelKind kind, int f,
                           int repeat, const std::string& model_dir = "")
{
    const int zones = config.zone_count();
    const int sensors = static_cast<int>(config.scene.sensor_count());
    const std::string model_name = model_kind_name(kind);
    const std::uint64_t run_seed = derive_seed(
        config.train_seed,
        {scenario_seed, snr_key(snr_db), model_tag(model_name), static_cast<std::uint64_t>(f),
         static_cast<std::uint64_t>(repeat)});

    nn::LabeledData train_data, test_data;
    nn::ModelSpec spec;
    nlohmann::ordered_json meta;

    if (kind == ModelKind::pnn) {
        const FeatureDataset train_features = load_feature_dataset(
            feature_path(data_dir, scenario_seed, snr_db, config.los, "train", f));
        const FeatureDataset test_features = load_feature_dataset(
            feature_path(data_dir, scenario_seed, snr_db, config.los, "test", f));
        const NormalizationStats stats = fit_normalization(train_features.records);
        train_data = features_to_data(train_features, stats);
        test_data = features_to_data(test_features, stats);
        spec = build_pnn(sensors, f, zones);
        meta["stats"] = {{"power", {{"mean", stats.power.mean}, {"std", stats.power.stddev}}},
                         {"index", {{"mean", stats.index.mean}, {"std", stats.index.stddev}}}};
    } else {
        const RawDataset train_raw =
            load_raw_dataset(raw_path(data_dir, scenario_seed, snr_db, config.los, "train"));
        const RawDataset test_raw =
            load_raw_dataset(raw_path(data_dir, scenario_seed, snr_db, config.los, "test"));
        if (kind == ModelKind::pdp_cnn) {
            const ScalarStats stats = fit_raw_power_stats(train_raw);
            train_data = raw_to_profile_data(train_raw, stats);
            test_data = raw_to_profile_data(test_raw, stats);
            spec = build_pdp_cnn(sensors, train_raw.bin_count, zones);
            meta["stats"] = {{"power", {{"mean", stats.mean}, {"std", stats.stddev}}}};
        } else {
            const auto [toa_stats, rss_stats] = fit_toa_rss_stats(train_raw);
            train_data = raw_to_toa_rss_data(train_raw, toa_stats, rss_stats);
            test_data = raw_to_toa_rss_data(test_raw, toa_stats, rss_stats);
            spec = build_toa_rss_mlp(sensors, zones);
            meta["stats"] = {{"toa", {{"mean", toa_stats.mean}, {"std", toa_stats.stddev}}},
                             {"rss", {{"mean", rss_stats.mean}, {"std", rss_stats.stddev}}}};
        }
    }

    spec.init_seed = run_seed;
    spec.batch_size = config.batch_size;
    spec.epochs = config.epochs;
    spec.adam.learning_rate = config.learning_rate;
    spec.adam.beta1 = config.adam_beta1;
    spec.adam.beta2 = config.adam_beta2;
    spec.adam.epsilon = config.adam_epsilon;

    nn::Model model(spec);
    nn::TrainOptions options;
    options.epochs = config.epochs;
    options.val_fraction = config.val_fraction;
    options.shuffle_seed = derive_seed(run_seed, {11});

    const auto start = std::chrono::steady_clock::now();
    const auto history = nn::train(model, train_data, options);
    const auto elapsed = std::chrono::steady_clock::now() - start;

    CellResult result;
    result.scenario_seed = scenario_seed;
    result.snr_db = snr_db;
    result.los = config.los;
    result.model = model_name;
    result.f = (kind == ModelKind::pnn) ? f : 0;
    result.repeat = repeat;
    result.run_seed = run_seed;
    result.rate_percent = 100.0 * nn::accuracy(model, test_data);
    result.feature_dim = model.input_feature_count();
    result.wall_seconds =
        config.deterministic
            ? 0.0
            : std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() / 1000.0;

    if (!model_dir.empty()) {
        std::filesystem::create_directories(model_dir);
        const std::string cell_name = dataset_stem(scenario_seed, snr_db, config.los, model_name)
                                      + (kind == ModelKind::pnn ? "_F" + std::to_string(f) : "")
                                      + "_r" + std::to_string(repeat);
        const std::string checkpoint =
            (std::filesystem::path(model_dir) / (cell_name + ".wpnn")).string();
        nn::save_model(model, checkpoint);
        meta["model"] = model_name;
        meta["f"] = result.f;
        meta["scenario_seed"] = scenario_seed;
        meta["snr_db"] = snr_db;
        meta["los"] = config.los;
        meta["run_seed"] = run_seed;
        meta["rate_percent"] = result.rate_percent;
        std::ofstream meta_out(checkpoint + ".json");
        meta_out << meta.dump(2) << '\n';
        nn::write_metrics_csv(history,
                              (std::filesystem::path(model_dir) / (cell_name + "_metrics.csv"))
                                  .string());
    }
    return result;
}

inline void write_metrics_table(const std::vector<CellResult>& cells, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("harness: cannot write " + path);
    out << "scenario_seed,snr_db,los,model,f,repeat,run_seed,rate_percent,feature_dim,"
           "wall_time_s\n";
    char line[256];
    for (const CellResult& c : cells) {
        std::snprintf(line, sizeof(line), "%llu,%g,%d,%s,%d,%d,%llu,%.2f,%d,%.3f\n",
                      static_cast<unsigned long long>(c.scenario_seed), c.snr_db, c.los ? 1 : 0,
                      c.model.c_str(), c.f, c.repeat,
                      static_cast<unsigned long long>(c.run_seed), c.rate_percent, c.feature_dim,
                      c.wall_seconds);
        out << line;
    }
}

struct SummaryRow {
    std::uint64_t scenario_seed = 0;
    double snr_db = 0.0;
    std::string model;
    int f = 0;
    int feature_dim = 0;
    double mean_rate = 0.0;
    double std_rate = 0.0;
    int repeats = 0;
};

inline std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells)
{
    std::map<std::tuple<std::uint64_t, double, std::string, int>, std::vector<const CellResult*>>
        groups;
    for (const CellResult& c : cells)
        groups[{c.scenario_seed, c.snr_db, c.model, c.f}].push_back(&c);

    std::vector<SummaryRow> rows;
    for (const auto& [key, group] : groups) {
        SummaryRow row;
        row.scenario_seed = std::get<0>(key);
        row.snr_db = std::get<1>(key);
        row.model = std::get<2>(key);
        row.f = std::get<3>(key);
        row.feature_dim = group.front()->feature_dim;
        row.repeats = static_cast<int>(group.size());
        double sum = 0.0;
        for (const CellResult* c : group) sum += c->rate_percent;
        row.mean_rate = sum / row.repeats;
        double ss = 0.0;
        for (const CellResult* c : group)
            ss += (c->rate_percent - row.mean_rate) * (c->rate_percent - row.mean_rate);
        row.std_rate = row.repeats > 1 ? std::sqrt(ss / (row.repeats - 1)) : 0.0;
        rows.push_back(row);
    }
    return rows;
}

inline void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("harness: cannot write " + path);
    out << "scenario_seed,snr_db,model,f,feature_dim,mean_rate,std_rate,repeats\n";
    char line[256];
    for (const SummaryRow& r : rows) {
        std::snprintf(line, sizeof(line), "%llu,%g,%s,%d,%d,%.2f,%.2f,%d\n",
                      static_cast<unsigned long long>(r.scenario_seed), r.snr_db,
                      r.model.c_str(), r.f, r.feature_dim, r.mean_rate, r.std_rate, r.repeats);
        out << line;
    }
}

/// Rate-versus-dimension summary across scenarios (one row per model, f,
/// snr).
inline void write_tradeoff_csv(const std::vector<CellResult>& cells, const std::string& path)
{
    std::map<std::tuple<std::string, int, int, double>, std::pair<double, int>> groups;
    for (const CellResult& c : cells) {
        auto& slot = groups[{c.model, c.f, c.feature_dim, c.snr_db}];
        slot.first += c.rate_percent;
        slot.second += 1;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("harness: cannot write " + path);
    out << "model,f,feature_dim,snr_db,mean_rate,runs\n";
    char line[256];
    for (const auto& [key, slot] : groups) {
        std::snprintf(line, sizeof(line), "%s,%d,%d,%g,%.2f,%d\n", std::get<0>(key).c_str(),
                      std::get<1>(key), std::get<2>(key), std::get<3>(key),
                      slot.first / slot.second, slot.second);
        out << line;
    }
}

struct TrainEvalOptions {
    std::vector<std::string> models;
    std::vector<int> f_values; // used by the two-branch classifier only
    int repeats = 1;
    bool save_models = true;
};

/// Full sweep over (scenario, snr, model, f, repeat); writes metrics.csv,
/// summary.csv, and tradeoff.csv under out_dir.
inline std::vector<CellResult> train_eval(const ExperimentConfig& config,
                                          const std::string& data_dir,
                                          const std::string& out_dir,
                                          const TrainEvalOptions& options)
{
    config.validate();
    std::filesystem::create_directories(out_dir);
    const std::string model_dir =
        options.save_models ? (std::filesystem::path(out_dir) / "models").string() : "";

    std::vector<CellResult> cells;
    for (std::uint64_t scenario_seed : config.scenario_seeds) {
        for (double snr_db : config.snr_db_list) {
            for (const std::string& name : options.models) {
                const ModelKind kind = parse_model_kind(name);
                const std::vector<int> fs =
                    (kind == ModelKind::pnn) ? options.f_values : std::vector<int>{0};
                for (int f : fs)
                    for (int repeat = 0; repeat < options.repeats; ++repeat)
                        cells.push_back(run_cell(config, data_dir, scenario_seed, snr_db, kind,
                                                 f, repeat, model_dir));
            }
        }
    }

    write_metrics_table(cells, (std::filesystem::path(out_dir) / "metrics.csv").string());
    write_summary_csv(summarize(cells),
                      (std::filesystem::path(out_dir) / "summary.csv").string());
    write_tradeoff_csv(cells, (std::filesystem::path(out_dir) / "tradeoff.csv").string());
    return cells;
}

/// Evaluates a saved checkpoint against a dataset split; reads the sidecar
/// metadata for normalization and dataset identity.
inline double evaluate_checkpoint(const std::string& checkpoint, const std::string& data_dir,
                                  const ExperimentConfig& config, const std::string& split)
{
    std::ifstream meta_in(checkpoint + ".json");
    if (!meta_in) throw std::runtime_error("harness: missing checkpoint metadata");
    const auto meta = nlohmann::json::parse(meta_in);
    const std::string model_name = meta.at("model").get<std::string>();
    const ModelKind kind = parse_model_kind(model_name);
    const std::uint64_t scenario_seed = meta.at("scenario_seed").get<std::uint64_t>();
    const double snr_db = meta.at("snr_db").get<double>();
    const bool los = meta.at("los").get<bool>();
    const int f = meta.at("f").get<int>();

    nn::Model model = nn::load_model(checkpoint);
    nn::LabeledData data;
    if (kind == ModelKind::pnn) {
        NormalizationStats stats;
        stats.power = {meta.at("stats").at("power").at("mean").get<double>(),
                       meta.at("stats").at("power").at("std").get<double>()};
        stats.index = {meta.at("stats").at("index").at("mean").get<double>(),
                       meta.at("stats").at("index").at("std").get<double>()};
        data = features_to_data(
            load_feature_dataset(feature_path(data_dir, scenario_seed, snr_db, los, split, f)),
            stats);
    } else if (kind == ModelKind::pdp_cnn) {
        const ScalarStats stats{meta.at("stats").at("power").at("mean").get<double>(),
                                meta.at("stats").at("power").at("std").get<double>()};
        data = raw_to_profile_data(
            load_raw_dataset(raw_path(data_dir, scenario_seed, snr_db, los, split)), stats);
    } else {
        const ScalarStats toa_stats{meta.at("stats").at("toa").at("mean").get<double>(),
                                    meta.at("stats").at("toa").at("std").get<double>()};
        const ScalarStats rss_stats{meta.at("stats").at("rss").at("mean").get<double>(),
                                    meta.at("stats").at("rss").at("std").get<double>()};
        data = raw_to_toa_rss_data(
            load_raw_dataset(raw_path(data_dir, scenario_seed, snr_db, los, split)), toa_stats,
            rss_stats);
    }
    (void)config;
    return 100.0 * nn::accuracy(model, data);
}

// ---------------------------------------------------------------------------
// table1 (built-in worked example)
// ---------------------------------------------------------------------------

/// Reference mean ordered powers for the built-in worked example (15 dB,
/// direct path present, ten bins, nu = 2).
inline std::vector<double> reference_mean_ordered_powers()
{
    return {53.9e-7, 26.8e-7, 17.4e-7, 12.5e-7, 9.46e-7,
            6.35e-7, 5.22e-7, 4.06e-7, 3.76e-7, 2.55e-7};
}

/// Separability terms paired with the reference vector (already normalized to
/// the grid maximum); the underlying samples are not part of this build.
inline std::vector<double> reference_separability_terms()
{
    return {0.9253, 0.7984, 0.9942, 0.9687, 0.9458, 0.9164};
}

struct Table1Result {
    SelectionTables tables;
    CriterionResult criterion;
    int f_min = 3;
    int f_max = 8;
};

inline Table1Result run_reference_example(double epsilon = 0.5)
{
    SelectionConfig sel;
    sel.f_min = 3;
    sel.f_max = 8;
    sel.nu = 2.0;
    sel.epsilon_weight = epsilon;

    Table1Result result;
    result.tables = build_likelihood_tables(reference_mean_ordered_powers(), sel);

    double max_gain = 0.0;
    for (const SelectionRow& row : result.tables.rows)
        max_gain = std::max(max_gain, row.ll_gain);
    std::vector<double> term_a;
    for (SelectionRow& row : result.tables.rows) {
        row.term_a = row.info_weight * row.ll_gain / max_gain;
        term_a.push_back(row.term_a);
    }
    result.criterion = combine_injected(term_a, reference_separability_terms(), epsilon, 3);
    for (std::size_t i = 0; i < result.tables.rows.size(); ++i) {
        result.tables.rows[i].term_b = reference_separability_terms()[i];
        result.tables.rows[i].criterion = result.criterion.criterion[i];
    }
    result.tables.f_star = result.criterion.f_star;
    return result;
}

inline void print_reference_example(std::ostream& out)
{
    const Table1Result result = run_reference_example();
    char line[256];
    out << "built-in selection example (nu=2, bins=10, F in [3,8], eps=0.5)\n";
    out << "f,psi2_e7,lambdas_e7,ll_gain,p_th_e7,exceed,acq,term_a,term_b,criterion\n";
    for (const SelectionRow& row : result.tables.rows) {
        std::vector<double> lam_scaled, acq;
        for (double l : row.lambdas) lam_scaled.push_back(l * 1e7);
        for (double p : row.acq_probs) acq.push_back(p);
        std::snprintf(line, sizeof(line), "%d,%.2f,", row.signal_bins, row.psi2 * 1e7);
        out << line << join_values(lam_scaled, "%.2f") << ',';
        std::snprintf(line, sizeof(line), "%.3f,%.2f,", row.ll_gain, row.threshold * 1e7);
        out << line << join_values(row.exceed_probs, "%.2f") << ',' << join_values(acq, "%.2f")
            << ',';
        std::snprintf(line, sizeof(line), "%.4f,%.4f,%.4f\n", row.term_a, row.term_b,
                      row.criterion);
        out << line;
    }
    out << "selected feature size: " << result.tables.f_star << "\n";
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

inline std::vector<CellResult> read_metrics_table(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("harness: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("harness: empty metrics file");
    std::vector<CellResult> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CellResult c;
        unsigned long long scenario = 0, run_seed = 0;
        int los = 0;
        char model[64] = {0};
        if (std::sscanf(line.c_str(), "%llu,%lf,%d,%63[^,],%d,%d,%llu,%lf,%d,%lf", &scenario,
                        &c.snr_db, &los, model, &c.f, &c.repeat, &run_seed, &c.rate_percent,
                        &c.feature_dim, &c.wall_seconds)
            != 10)
            throw std::runtime_error("harness: malformed metrics row: " + line);
        c.scenario_seed = scenario;
        c.run_seed = run_seed;
        c.los = los != 0;
        c.model = model;
        cells.push_back(c);
    }
    return cells;
}

inline void print_report(const std::string& metrics_path, std::ostream& out)
{
    const auto cells = read_metrics_table(metrics_path);
    const auto rows = summarize(cells);
    out << "scenario  snr_db  model     f   dim   mean_rate  std_rate  repeats\n";
    char line[256];
    for (const SummaryRow& r : rows) {
        std::snprintf(line, sizeof(line), "%-9llu %-7g %-9s %-3d %-5d %-10.2f %-9.2f %d\n",
                      static_cast<unsigned long long>(r.scenario_seed), r.snr_db,
                      r.model.c_str(), r.f, r.feature_dim, r.mean_rate, r.std_rate, r.repeats);
        out << line;
    }
}

} // namespace wpos::harness

#endif // WPOS_HARNESS_HPP
