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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "wpos/features.hpp"
#include "wpos/specfun.hpp"

using wpos::FeatureRecord;
using wpos::PdpVector;
using wpos::RandomStream;

TEST_CASE("top features sort by power with index tie-break")
{
    const auto top = wpos::extract_features({0.1, 0.9, 0.5}, 2);
    CHECK(top.powers == std::vector<double>{0.9, 0.5});
    CHECK(top.bins == std::vector<int>{1, 2});

    const auto tied = wpos::extract_features({0.5, 0.5, 0.1}, 2);
    CHECK(tied.bins == std::vector<int>{0, 1});

    const auto full = wpos::extract_features({0.3, 0.1, 0.9, 0.2}, 4);
    std::vector<int> sorted_bins = full.bins;
    std::sort(sorted_bins.begin(), sorted_bins.end());
    CHECK(sorted_bins == std::vector<int>{0, 1, 2, 3});

    CHECK_THROWS_AS(wpos::extract_features({0.1, 0.2}, 3), std::invalid_argument);
    CHECK_THROWS_AS(wpos::extract_features({0.1, 0.2}, 0), std::invalid_argument);
}

TEST_CASE("extraction is scale-equivariant in powers, invariant in indices")
{
    RandomStream rng(41);
    PdpVector pdp(50);
    for (double& x : pdp) x = rng.uniform();
    const auto base = wpos::extract_features(pdp, 7);

    PdpVector scaled = pdp;
    for (double& x : scaled) x *= 3.75;
    const auto after = wpos::extract_features(scaled, 7);

    CHECK(after.bins == base.bins);
    for (std::size_t i = 0; i < base.powers.size(); ++i)
        CHECK(after.powers[i] == doctest::Approx(3.75 * base.powers[i]).epsilon(1e-12));
}

TEST_CASE("scattering the prefix back reproduces it")
{
    RandomStream rng(42);
    PdpVector pdp(40);
    for (double& x : pdp) x = rng.uniform();
    const auto top = wpos::extract_features(pdp, 6);

    PdpVector rebuilt(pdp.size(), 0.0);
    for (std::size_t i = 0; i < top.bins.size(); ++i) rebuilt[top.bins[i]] = top.powers[i];
    const auto again = wpos::extract_features(rebuilt, 6);
    CHECK(again.powers == top.powers);
    CHECK(again.bins == top.bins);
}

TEST_CASE("feature records serialize 2FM values")
{
    const int sensors = 12, bins = 100, f = 5;
    RandomStream rng(43);
    std::vector<PdpVector> frames(sensors, PdpVector(bins));
    for (auto& frame : frames)
        for (double& x : frame) x = rng.uniform();

    const FeatureRecord record = wpos::make_feature_record(frames, f);
    CHECK(record.feature_size() == static_cast<std::size_t>(2 * f * sensors));
    // Dimension-reduction ratio against the raw profile.
    CHECK(static_cast<double>(record.feature_size()) / (sensors * bins)
          == doctest::Approx(2.0 * f / bins).epsilon(1e-12));
}

TEST_CASE("normalization is fit on training data only")
{
    FeatureRecord a;
    a.sensor_count = 1;
    a.feature_count = 2;
    a.powers = {1.0, 3.0};
    a.bins = {10.0, 30.0};
    FeatureRecord b = a;
    b.powers = {5.0, 7.0};
    b.bins = {50.0, 70.0};
    const std::vector<FeatureRecord> train{a, b};

    const auto stats = wpos::fit_normalization(train);

    std::vector<double> normalized_powers, normalized_bins;
    for (const auto& r : train) {
        const auto [e, bb] = wpos::assemble_matrices(r, stats);
        normalized_powers.insert(normalized_powers.end(), e.begin(), e.end());
        normalized_bins.insert(normalized_bins.end(), bb.begin(), bb.end());
    }
    CHECK(oracles::mean(normalized_powers) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(oracles::variance(normalized_powers) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(oracles::mean(normalized_bins) == doctest::Approx(0.0).epsilon(1e-9));

    // A shifted test batch normalized with frozen stats keeps a nonzero mean.
    FeatureRecord test = a;
    test.powers = {11.0, 13.0};
    const auto [e_test, b_test] = wpos::assemble_matrices(test, stats);
    CHECK(std::fabs(oracles::mean(e_test)) > 1.0);

    // Identity stats pass raw values through.
    const wpos::NormalizationStats identity;
    const auto [raw, raw_bins] = wpos::assemble_matrices(a, identity);
    CHECK(raw == a.powers);
    CHECK(raw_bins == a.bins);
}

TEST_CASE("arrival estimate finds the first crossing")
{
    const double sigma2 = 1.0, nu = 8.0;
    PdpVector pdp(100, sigma2);
    pdp[7] = 50.0 * sigma2;
    const auto f = wpos::toa_rss_features(pdp, sigma2, nu);
    CHECK(f.toa_bin == 7);

    const PdpVector ones(100, 1.0);
    CHECK(wpos::toa_rss_features(ones, 1.0, nu).rss == doctest::Approx(100.0));
}

TEST_CASE("arrival estimate on pure noise matches the tail oracle")
{
    RandomStream rng(44);
    const double sigma2 = 1.0;

    for (double nu : {8.0, 24.0}) {
        const double threshold = sigma2 + 4.0 * sigma2 * std::sqrt(2.0 / nu);
        // Per-bin false alarm from quadrature of the scaled central density.
        const double fa = 1.0
                          - oracles::integrate(
                              [sigma2, nu](double x) {
                                  return x <= 0.0 ? 0.0
                                                  : std::exp(wpos::chi2_log_pdf_central(
                                                      x, sigma2 / nu, nu));
                              },
                              1e-12, threshold, 1e-12);
        const int bins = 100;
        const double predicted = std::pow(1.0 - fa, bins);

        int clean = 0;
        const int frames = 4000;
        for (int i = 0; i < frames; ++i) {
            PdpVector pdp(bins);
            for (double& x : pdp) x = wpos::synthesize_bin(0.0, sigma2, nu, rng);
            if (wpos::toa_rss_features(pdp, sigma2, nu).toa_bin == bins) ++clean;
        }
        const double observed = static_cast<double>(clean) / frames;
        CHECK(observed == doctest::Approx(predicted).epsilon(0.03));
        // Shorter frames at the wider integration window keep false alarms
        // below one percent.
        if (nu == 24.0) CHECK(std::pow(1.0 - fa, 10) > 0.99);
    }
}

TEST_CASE("toa/rss vector has 2M entries")
{
    RandomStream rng(45);
    std::vector<PdpVector> frames(12, PdpVector(100));
    for (auto& frame : frames)
        for (double& x : frame) x = wpos::synthesize_bin(0.0, 1.0, 8.0, rng);
    const auto v = wpos::toa_rss_vector(frames, 1.0, 8.0);
    CHECK(v.size() == 24);
}
