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

#ifndef WPOS_CONFIG_HPP
#define WPOS_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wpos/channel.hpp"
#include "wpos/geometry.hpp"
#include "wpos/pdp.hpp"
#include "wpos/selection.hpp"

namespace wpos {

/// Everything one experiment needs, parsed from a key = value config file.
/// Unset keys keep desk-scale defaults; full-scale values are one edit away.
struct ExperimentConfig {
    int schema_version = 1;

    SceneConfig scene;
    int zone_rings = 2;
    int zone_sectors = 4;

    ChannelParams channel;
    DetectionParams detection; // snr_db filled per entry of snr_db_list
    bool los = true;

    std::vector<double> snr_db_list{15.0, 5.0};
    std::vector<std::uint64_t> scenario_seeds{101, 202};
    int train_records = 4000;
    int test_records = 1000;
    int calibration_samples = 100000;

    std::vector<int> f_grid{4, 5, 6, 7, 8, 9, 10};
    double epsilon_weight = -1.0; // < 0: pick 0.8 when the direct path is on, else 0.6
    int knn_neighbors = 30;
    int kl_max_per_zone = 400;
    KlDimFactor kl_dim_factor = KlDimFactor::signal_bins;

    std::vector<std::string> models{"pnn"};
    int epochs = 10;
    int batch_size = 256;
    double learning_rate = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double val_fraction = 0.1;
    int repeats = 3;
    std::uint64_t train_seed = 7000;

    int threads = 1;
    bool deterministic = true;

    int zone_count() const { return zone_rings * zone_sectors; }

    double effective_epsilon() const
    {
        if (epsilon_weight >= 0.0) return epsilon_weight;
        return los ? 0.8 : 0.6;
    }

    ZoneLayout zone_layout() const
    {
        return make_zone_layout(zone_rings, zone_sectors, scene.d_r);
    }

    void validate() const
    {
        if (schema_version != 1) throw std::invalid_argument("config: unsupported schema_version");
        scene.validate();
        channel.validate();
        detection.validate();
        if (train_records < 1 || test_records < 1)
            throw std::invalid_argument("config: record counts must be >= 1");
        if (snr_db_list.empty()) throw std::invalid_argument("config: empty snr list");
        if (scenario_seeds.empty()) throw std::invalid_argument("config: no scenario seeds");
        for (std::size_t i = 0; i < scenario_seeds.size(); ++i)
            for (std::size_t j = i + 1; j < scenario_seeds.size(); ++j)
                if (scenario_seeds[i] == scenario_seeds[j])
                    throw std::invalid_argument("config: scenario seeds must be distinct");
        if (f_grid.empty()) throw std::invalid_argument("config: empty feature grid");
        for (int f : f_grid)
            if (f < 1 || f >= detection.bin_count())
                throw std::invalid_argument("config: feature grid outside [1, N_b)");
        if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
        if (epochs < 0) throw std::invalid_argument("config: epochs must be >= 0");
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::string item;
    std::stringstream stream(text);
    while (std::getline(stream, item, ',')) {
        const auto begin = item.find_first_not_of(" \t");
        if (begin == std::string::npos) continue;
        const auto end = item.find_last_not_of(" \t");
        items.push_back(item.substr(begin, end - begin + 1));
    }
    return items;
}

} // namespace detail

/// Parses the documented key = value format ('#' starts a comment). Unknown
/// keys are rejected so typos fail loudly.
inline ExperimentConfig parse_config_text(std::istream& in)
{
    std::map<std::string, std::string> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument("config: line " + std::to_string(line_no)
                                            + " is not key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key");
        entries[key] = value;
    }

    ExperimentConfig config;
    std::vector<std::string> sensor_overrides;

    auto consume = [&entries](const std::string& key) -> const std::string* {
        const auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };
    auto get_double = [&consume](const std::string& key, double& slot) {
        if (const auto* v = consume(key)) slot = std::stod(*v);
    };
    auto get_int = [&consume](const std::string& key, int& slot) {
        if (const auto* v = consume(key)) slot = std::stoi(*v);
    };
    auto get_u64 = [&consume](const std::string& key, std::uint64_t& slot) {
        if (const auto* v = consume(key)) slot = std::stoull(*v);
    };
    auto get_bool = [&consume](const std::string& key, bool& slot) {
        if (const auto* v = consume(key)) {
            if (*v == "true" || *v == "1")
                slot = true;
            else if (*v == "false" || *v == "0")
                slot = false;
            else
                throw std::invalid_argument("config: boolean expected for " + key);
        }
    };

    get_int("schema_version", config.schema_version);
    get_double("scene.d_x", config.scene.d_x);
    get_double("scene.d_y", config.scene.d_y);
    get_double("scene.d_z", config.scene.d_z);
    get_double("scene.d_r", config.scene.d_r);
    get_double("scene.d_h", config.scene.d_h);
    get_int("zones.rings", config.zone_rings);
    get_int("zones.sectors", config.zone_sectors);

    get_double("channel.mean_clusters", config.channel.mean_cluster_count);
    get_int("channel.rays_per_path", config.channel.rays_per_path);
    get_double("channel.ray_interarrival_ns", config.channel.ray_interarrival_ns);
    get_double("channel.path_decay_ns", config.channel.path_decay_ns);
    get_double("channel.ray_decay_ns", config.channel.ray_decay_ns);
    get_double("channel.pathloss_exponent", config.channel.pathloss_exponent);
    get_double("channel.reference_power_dbm", config.channel.reference_power_dbm);
    get_double("channel.reference_distance_m", config.channel.reference_distance_m);
    get_double("channel.shadow_var_db", config.channel.shadow_var_db);
    get_double("channel.nakagami_mu_mean_db", config.channel.nakagami_mu_mean_db);
    get_double("channel.nakagami_mu_var_db", config.channel.nakagami_mu_var_db);
    get_bool("channel.los", config.los);

    get_double("detection.bandwidth_hz", config.detection.bandwidth_hz);
    get_double("detection.frame_ns", config.detection.frame_ns);
    get_double("detection.bin_ns", config.detection.bin_ns);

    if (const auto* v = consume("snr_db_list")) {
        config.snr_db_list.clear();
        for (const auto& item : detail::split_list(*v)) config.snr_db_list.push_back(std::stod(item));
    }
    if (const auto* v = consume("scenario_seeds")) {
        config.scenario_seeds.clear();
        for (const auto& item : detail::split_list(*v))
            config.scenario_seeds.push_back(std::stoull(item));
    }
    get_int("data.train_records", config.train_records);
    get_int("data.test_records", config.test_records);
    get_int("data.calibration_samples", config.calibration_samples);

    if (const auto* v = consume("features.f_grid")) {
        config.f_grid.clear();
        for (const auto& item : detail::split_list(*v)) config.f_grid.push_back(std::stoi(item));
    }
    get_double("selection.epsilon", config.epsilon_weight);
    get_int("selection.knn_neighbors", config.knn_neighbors);
    get_int("selection.kl_max_per_zone", config.kl_max_per_zone);
    if (const auto* v = consume("selection.kl_dim_factor")) {
        if (*v == "f")
            config.kl_dim_factor = KlDimFactor::signal_bins;
        else if (*v == "2fm")
            config.kl_dim_factor = KlDimFactor::full_vector;
        else
            throw std::invalid_argument("config: selection.kl_dim_factor must be f or 2fm");
    }

    if (const auto* v = consume("models")) {
        config.models.clear();
        for (const auto& item : detail::split_list(*v)) config.models.push_back(item);
    }
    get_int("train.epochs", config.epochs);
    get_int("train.batch_size", config.batch_size);
    get_double("train.learning_rate", config.learning_rate);
    get_double("train.adam_beta1", config.adam_beta1);
    get_double("train.adam_beta2", config.adam_beta2);
    get_double("train.adam_epsilon", config.adam_epsilon);
    get_double("train.val_fraction", config.val_fraction);
    get_int("train.repeats", config.repeats);
    get_u64("train.seed", config.train_seed);
    get_int("threads", config.threads);
    get_bool("deterministic", config.deterministic);

    // Sensor overrides: sensor.0 = x y z, one key per sensor, or the default
    // 12-point placement when absent.
    int sensor_count = 12;
    get_int("scene.sensors", sensor_count);
    for (int i = 0;; ++i) {
        const auto* v = consume("sensor." + std::to_string(i));
        if (v == nullptr) break;
        sensor_overrides.push_back(*v);
    }
    if (!sensor_overrides.empty()) {
        config.scene.sensors.clear();
        for (const auto& text : sensor_overrides) {
            std::stringstream s(text);
            Vec3 p;
            if (!(s >> p.x >> p.y >> p.z))
                throw std::invalid_argument("config: sensor override needs three coordinates");
            config.scene.sensors.push_back(p);
        }
    } else {
        config.scene.sensors = default_sensor_positions(config.scene.d_x, config.scene.d_y,
                                                        config.scene.d_z, sensor_count);
    }

    // Reject unknown keys.
    static const char* known[] = {"schema_version", "scene.d_x", "scene.d_y", "scene.d_z",
                                  "scene.d_r", "scene.d_h", "scene.sensors", "zones.rings",
                                  "zones.sectors", "channel.mean_clusters",
                                  "channel.rays_per_path", "channel.ray_interarrival_ns",
                                  "channel.path_decay_ns", "channel.ray_decay_ns",
                                  "channel.pathloss_exponent", "channel.reference_power_dbm",
                                  "channel.reference_distance_m", "channel.shadow_var_db",
                                  "channel.nakagami_mu_mean_db", "channel.nakagami_mu_var_db",
                                  "channel.los", "detection.bandwidth_hz", "detection.frame_ns",
                                  "detection.bin_ns", "snr_db_list", "scenario_seeds",
                                  "data.train_records", "data.test_records",
                                  "data.calibration_samples", "features.f_grid",
                                  "selection.epsilon", "selection.knn_neighbors",
                                  "selection.kl_max_per_zone", "selection.kl_dim_factor",
                                  "models", "train.epochs", "train.batch_size",
                                  "train.learning_rate", "train.adam_beta1", "train.adam_beta2",
                                  "train.adam_epsilon", "train.val_fraction", "train.repeats",
                                  "train.seed", "threads", "deterministic"};
    for (const auto& [key, value] : entries) {
        if (key.rfind("sensor.", 0) == 0) continue;
        bool found = false;
        for (const char* k : known) found |= (key == k);
        if (!found) throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    config.validate();
    return config;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse_config_text(in);
}

/// JSON echo of the effective configuration, embedded in the run manifest.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c)
{
    nlohmann::ordered_json j;
    j["schema_version"] = c.schema_version;
    j["scene"] = {{"d_x", c.scene.d_x}, {"d_y", c.scene.d_y}, {"d_z", c.scene.d_z},
                  {"d_r", c.scene.d_r}, {"d_h", c.scene.d_h}};
    nlohmann::ordered_json sensors = nlohmann::ordered_json::array();
    for (const Vec3& s : c.scene.sensors) sensors.push_back({s.x, s.y, s.z});
    j["scene"]["sensors"] = sensors;
    j["zones"] = {{"rings", c.zone_rings}, {"sectors", c.zone_sectors}};
    j["channel"] = {{"mean_clusters", c.channel.mean_cluster_count},
                    {"rays_per_path", c.channel.rays_per_path},
                    {"ray_interarrival_ns", c.channel.ray_interarrival_ns},
                    {"path_decay_ns", c.channel.path_decay_ns},
                    {"ray_decay_ns", c.channel.ray_decay_ns},
                    {"pathloss_exponent", c.channel.pathloss_exponent},
                    {"reference_power_dbm", c.channel.reference_power_dbm},
                    {"reference_distance_m", c.channel.reference_distance_m},
                    {"shadow_var_db", c.channel.shadow_var_db},
                    {"nakagami_mu_mean_db", c.channel.nakagami_mu_mean_db},
                    {"nakagami_mu_var_db", c.channel.nakagami_mu_var_db},
                    {"los", c.los}};
    j["detection"] = {{"bandwidth_hz", c.detection.bandwidth_hz},
                      {"frame_ns", c.detection.frame_ns},
                      {"bin_ns", c.detection.bin_ns}};
    j["snr_db_list"] = c.snr_db_list;
    j["scenario_seeds"] = c.scenario_seeds;
    j["data"] = {{"train_records", c.train_records},
                 {"test_records", c.test_records},
                 {"calibration_samples", c.calibration_samples}};
    j["features"] = {{"f_grid", c.f_grid}};
    j["selection"] = {{"epsilon", c.effective_epsilon()},
                      {"knn_neighbors", c.knn_neighbors},
                      {"kl_max_per_zone", c.kl_max_per_zone},
                      {"kl_dim_factor",
                       c.kl_dim_factor == KlDimFactor::signal_bins ? "f" : "2fm"}};
    j["models"] = c.models;
    j["train"] = {{"epochs", c.epochs},
                  {"batch_size", c.batch_size},
                  {"learning_rate", c.learning_rate},
                  {"adam_beta1", c.adam_beta1},
                  {"adam_beta2", c.adam_beta2},
                  {"adam_epsilon", c.adam_epsilon},
                  {"val_fraction", c.val_fraction},
                  {"repeats", c.repeats},
                  {"seed", c.train_seed}};
    j["threads"] = c.threads;
    j["deterministic"] = c.deterministic;
    return j;
}

} // namespace wpos

#endif // WPOS_CONFIG_HPP
