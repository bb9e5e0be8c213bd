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

#ifndef WPOS_DATASET_HPP
#define WPOS_DATASET_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wpos/channel.hpp"
#include "wpos/features.hpp"
#include "wpos/geometry.hpp"

namespace wpos {

static_assert(std::endian::native == std::endian::little, "dataset format is little-endian");

/// One synthesized frame set: the full M x N_b profile for a labeled target.
struct RawRecord {
    std::int32_t zone = 0;
    std::uint64_t seed = 0;
    Vec3 target;
    std::vector<double> powers; // sensor-major, M * N_b
};

/// Raw profile dataset plus the acquisition context needed downstream.
struct RawDataset {
    std::int32_t sensor_count = 0;
    std::int32_t bin_count = 0;
    double sigma2 = 0.0;
    double nu = 0.0;
    std::vector<RawRecord> records;
};

inline constexpr char kRawMagic[4] = {'W', 'P', 'D', 'P'};
inline constexpr std::uint32_t kRawVersion = 1;

namespace detail {

template <typename T> void put(std::ostream& out, T v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T> T take(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("dataset: truncated file");
    return v;
}

} // namespace detail

inline void save_raw_dataset(const RawDataset& data, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot write " + path);
    out.write(kRawMagic, sizeof(kRawMagic));
    detail::put<std::uint32_t>(out, kRawVersion);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(data.records.size()));
    detail::put<std::int32_t>(out, data.sensor_count);
    detail::put<std::int32_t>(out, data.bin_count);
    detail::put<double>(out, data.sigma2);
    detail::put<double>(out, data.nu);
    const std::size_t values = static_cast<std::size_t>(data.sensor_count) * data.bin_count;
    for (const RawRecord& r : data.records) {
        if (r.powers.size() != values) throw std::invalid_argument("dataset: malformed record");
        detail::put<std::int32_t>(out, r.zone);
        detail::put<std::uint64_t>(out, r.seed);
        detail::put<double>(out, r.target.x);
        detail::put<double>(out, r.target.y);
        detail::put<double>(out, r.target.z);
        out.write(reinterpret_cast<const char*>(r.powers.data()),
                  static_cast<std::streamsize>(values * sizeof(double)));
    }
    if (!out) throw std::runtime_error("dataset: write failed: " + path);
}

inline RawDataset load_raw_dataset(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, 4) != std::string(kRawMagic, 4))
        throw std::runtime_error("dataset: bad magic in " + path);
    if (detail::take<std::uint32_t>(in) != kRawVersion)
        throw std::runtime_error("dataset: unsupported version in " + path);

    RawDataset data;
    const auto count = detail::take<std::uint32_t>(in);
    data.sensor_count = detail::take<std::int32_t>(in);
    data.bin_count = detail::take<std::int32_t>(in);
    data.sigma2 = detail::take<double>(in);
    data.nu = detail::take<double>(in);
    const std::size_t values = static_cast<std::size_t>(data.sensor_count) * data.bin_count;
    data.records.resize(count);
    for (RawRecord& r : data.records) {
        r.zone = detail::take<std::int32_t>(in);
        r.seed = detail::take<std::uint64_t>(in);
        r.target.x = detail::take<double>(in);
        r.target.y = detail::take<double>(in);
        r.target.z = detail::take<double>(in);
        r.powers.resize(values);
        in.read(reinterpret_cast<char*>(r.powers.data()),
                static_cast<std::streamsize>(values * sizeof(double)));
        if (!in) throw std::runtime_error("dataset: truncated records in " + path);
    }
    return data;
}

/// Feature dataset: a JSON-lines file with a header object followed by one
/// record object per line.
struct FeatureDataset {
    std::int32_t sensor_count = 0;
    std::int32_t feature_count = 0;
    std::vector<FeatureRecord> records;
};

inline void save_feature_dataset(const FeatureDataset& data, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dataset: cannot write " + path);
    nlohmann::ordered_json header;
    header["schema_version"] = 1;
    header["kind"] = "features";
    header["m"] = data.sensor_count;
    header["f"] = data.feature_count;
    header["records"] = data.records.size();
    out << header.dump() << '\n';
    for (const FeatureRecord& r : data.records) {
        nlohmann::ordered_json j;
        j["scenario"] = r.scenario_id;
        j["seed"] = r.seed;
        j["target"] = {r.target.x, r.target.y, r.target.z};
        j["zone"] = r.zone;
        j["powers"] = r.powers;
        j["bins"] = r.bins;
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("dataset: write failed: " + path);
}

inline FeatureDataset load_feature_dataset(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset: empty file " + path);
    const auto header = nlohmann::json::parse(line);
    if (header.value("schema_version", 0) != 1 || header.value("kind", "") != "features")
        throw std::runtime_error("dataset: unexpected header in " + path);

    FeatureDataset data;
    data.sensor_count = header.at("m").get<std::int32_t>();
    data.feature_count = header.at("f").get<std::int32_t>();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        FeatureRecord r;
        r.scenario_id = j.at("scenario").get<std::int32_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.target = {j.at("target")[0].get<double>(), j.at("target")[1].get<double>(),
                    j.at("target")[2].get<double>()};
        r.zone = j.at("zone").get<std::int32_t>();
        r.sensor_count = data.sensor_count;
        r.feature_count = data.feature_count;
        r.powers = j.at("powers").get<std::vector<double>>();
        r.bins = j.at("bins").get<std::vector<double>>();
        if (r.powers.size() != static_cast<std::size_t>(data.sensor_count) * data.feature_count
            || r.bins.size() != r.powers.size())
            throw std::runtime_error("dataset: malformed feature record in " + path);
        data.records.push_back(std::move(r));
    }
    return data;
}

/// Versioned scenario file so training and testing datasets can share one
/// frozen environment draw.
inline void save_scenario(const Scenario& scenario, const std::string& path)
{
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = "scenario";
    j["los_enabled"] = scenario.los_enabled;
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (const Vec3& c : scenario.clusters) clusters.push_back({c.x, c.y, c.z});
    j["clusters"] = clusters;
    j["sensor_shadow"] = scenario.sensor_shadow;
    j["path_shadow"] = scenario.path_shadow;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dataset: cannot write " + path);
    out << j.dump(2) << '\n';
}

inline Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("dataset: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema_version", 0) != 1 || j.value("kind", "") != "scenario")
        throw std::runtime_error("dataset: unexpected scenario header in " + path);
    Scenario scenario;
    scenario.los_enabled = j.at("los_enabled").get<bool>();
    for (const auto& c : j.at("clusters"))
        scenario.clusters.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    scenario.sensor_shadow = j.at("sensor_shadow").get<std::vector<double>>();
    scenario.path_shadow = j.at("path_shadow").get<std::vector<double>>();
    if (scenario.path_shadow.size() != scenario.path_count())
        throw std::runtime_error("dataset: scenario path shadowing count mismatch");
    return scenario;
}

/// Optional CSV dump of a raw dataset for eyeballing.
inline void export_raw_csv(const RawDataset& data, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dataset: cannot write " + path);
    out << "record,zone,sensor";
    for (int n = 0; n < data.bin_count; ++n) out << ",bin" << n;
    out << '\n';
    char cell[32];
    for (std::size_t i = 0; i < data.records.size(); ++i) {
        const RawRecord& r = data.records[i];
        for (int m = 0; m < data.sensor_count; ++m) {
            out << i << ',' << r.zone << ',' << m;
            for (int n = 0; n < data.bin_count; ++n) {
                std::snprintf(cell, sizeof(cell), ",%.9e",
                              r.powers[static_cast<std::size_t>(m) * data.bin_count + n]);
                out << cell;
            }
            out << '\n';
        }
    }
}

} // namespace wpos

#endif // WPOS_DATASET_HPP
