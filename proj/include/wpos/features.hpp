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

#ifndef WPOS_FEATURES_HPP
#define WPOS_FEATURES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wpos/geometry.hpp"
#include "wpos/pdp.hpp"

namespace wpos {

/// Top-F powers (nonincreasing) and their temporal bin indices for one
/// sensor. Ties in power break toward the smaller bin index.
struct TopFeatures {
    std::vector<double> powers;
    std::vector<int> bins;
};

inline TopFeatures extract_features(const PdpVector& pdp, int feature_count)
{
    const int bins = static_cast<int>(pdp.size());
    if (feature_count < 1 || feature_count > bins)
        throw std::invalid_argument("features: feature count out of range");

    std::vector<int> order(bins);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + feature_count, order.end(),
                      [&pdp](int a, int b) {
                          if (pdp[a] != pdp[b]) return pdp[a] > pdp[b];
                          return a < b;
                      });

    TopFeatures top;
    top.powers.reserve(feature_count);
    top.bins.reserve(feature_count);
    for (int n = 0; n < feature_count; ++n) {
        top.powers.push_back(pdp[order[n]]);
        top.bins.push_back(order[n]);
    }
    return top;
}

/// One labeled data point: per-sensor ordered powers and bin indices
/// (row-major M x F) plus provenance.
struct FeatureRecord {
    std::int32_t scenario_id = 0;
    std::uint64_t seed = 0;
    Vec3 target;
    std::int32_t zone = 0;
    std::int32_t sensor_count = 0;
    std::int32_t feature_count = 0;
    std::vector<double> powers; // sensor_count x feature_count
    std::vector<double> bins;   // sensor_count x feature_count, integer-valued

    std::size_t feature_size() const { return powers.size() + bins.size(); } // 2 F M
};

inline FeatureRecord make_feature_record(const std::vector<PdpVector>& frames, int feature_count)
{
    FeatureRecord record;
    record.sensor_count = static_cast<std::int32_t>(frames.size());
    record.feature_count = feature_count;
    record.powers.reserve(frames.size() * feature_count);
    record.bins.reserve(frames.size() * feature_count);
    for (const PdpVector& pdp : frames) {
        const TopFeatures top = extract_features(pdp, feature_count);
        record.powers.insert(record.powers.end(), top.powers.begin(), top.powers.end());
        for (int b : top.bins) record.bins.push_back(static_cast<double>(b));
    }
    return record;
}

/// Scalar z-score statistics for one feature domain.
struct ScalarStats {
    double mean = 0.0;
    double stddev = 1.0;

    double apply(double x) const { return (x - mean) / stddev; }
};

inline ScalarStats fit_scalar_stats(const std::vector<const std::vector<double>*>& columns)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto* column : columns) {
        for (double v : *column) sum += v;
        count += column->size();
    }
    if (count == 0) throw std::invalid_argument("features: no data to fit stats");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto* column : columns)
        for (double v : *column) ss += (v - mean) * (v - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(count));
    if (!(stddev > 0.0)) throw std::invalid_argument("features: degenerate domain, stddev == 0");
    return {mean, stddev};
}

/// Global per-domain normalization, fitted on training data only.
struct NormalizationStats {
    ScalarStats power;
    ScalarStats index;
};

inline NormalizationStats fit_normalization(const std::vector<FeatureRecord>& training)
{
    std::vector<const std::vector<double>*> power_cols, index_cols;
    power_cols.reserve(training.size());
    index_cols.reserve(training.size());
    for (const FeatureRecord& r : training) {
        power_cols.push_back(&r.powers);
        index_cols.push_back(&r.bins);
    }
    return {fit_scalar_stats(power_cols), fit_scalar_stats(index_cols)};
}

/// Normalized M x F matrices (row-major) for one record: powers in `first`,
/// bin indices in `second`.
inline std::pair<std::vector<double>, std::vector<double>>
assemble_matrices(const FeatureRecord& record, const NormalizationStats& stats)
{
    if (record.powers.size() != record.bins.size()
        || record.powers.size()
               != static_cast<std::size_t>(record.sensor_count) * record.feature_count)
        throw std::invalid_argument("features: malformed record");
    std::vector<double> e(record.powers.size()), b(record.bins.size());
    for (std::size_t i = 0; i < record.powers.size(); ++i) {
        e[i] = stats.power.apply(record.powers[i]);
        b[i] = stats.index.apply(record.bins[i]);
    }
    return {std::move(e), std::move(b)};
}

/// Threshold first-crossing arrival estimate plus total received power for
/// one sensor. The threshold sits four noise standard deviations above the
/// noise mean; a frame with no crossing reports the bin count.
struct ToaRss {
    int toa_bin = 0;
    double rss = 0.0;
};

inline ToaRss toa_rss_features(const PdpVector& pdp, double sigma2, double nu)
{
    if (!(sigma2 > 0.0) || !(nu >= 1.0))
        throw std::invalid_argument("features: invalid noise parameters");
    const double threshold = sigma2 + 4.0 * sigma2 * std::sqrt(2.0 / nu);
    ToaRss out;
    out.toa_bin = static_cast<int>(pdp.size());
    for (std::size_t n = 0; n < pdp.size(); ++n) {
        if (pdp[n] > threshold) {
            out.toa_bin = static_cast<int>(n);
            break;
        }
    }
    out.rss = std::accumulate(pdp.begin(), pdp.end(), 0.0);
    return out;
}

/// 2M-vector of per-sensor arrival estimates followed by per-sensor total
/// powers.
inline std::vector<double> toa_rss_vector(const std::vector<PdpVector>& frames, double sigma2,
                                          double nu)
{
    std::vector<double> features(2 * frames.size());
    for (std::size_t m = 0; m < frames.size(); ++m) {
        const ToaRss f = toa_rss_features(frames[m], sigma2, nu);
        features[m] = static_cast<double>(f.toa_bin);
        features[frames.size() + m] = f.rss;
    }
    return features;
}

} // namespace wpos

#endif // WPOS_FEATURES_HPP
