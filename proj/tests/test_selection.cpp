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

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "wpos/rng.hpp"
#include "wpos/selection.hpp"

using wpos::RandomStream;
using wpos::SelectionConfig;

namespace {

// Reference mean ordered-power vector used across the selection checks
// (15 dB, direct path present, 10 bins, nu = 2).
std::vector<double> reference_powers()
{
    return {53.9e-7, 26.8e-7, 17.4e-7, 12.5e-7, 9.46e-7,
            6.35e-7, 5.22e-7, 4.06e-7, 3.76e-7, 2.55e-7};
}

SelectionConfig reference_config()
{
    SelectionConfig config;
    config.f_min = 3;
    config.f_max = 8;
    config.nu = 2.0;
    config.epsilon_weight = 0.5;
    return config;
}

bool close(double value, double printed)
{
    const double tol = std::max(0.02, std::fabs(printed) * 0.02);
    return std::fabs(value - printed) <= tol;
}

} // namespace

TEST_CASE("noise scale and noncentrality estimates")
{
    const auto powers = reference_powers();

    const auto p5 = wpos::estimate_parameters(powers, 5);
    CHECK(p5.psi2 == doctest::Approx(4.39e-7).epsilon(0.01));
    CHECK(p5.lambdas[2] == doctest::Approx(12.97e-7).epsilon(0.01));
    CHECK(p5.lambdas[3] == doctest::Approx(8.11e-7).epsilon(0.01));
    CHECK(p5.lambdas[4] == doctest::Approx(5.07e-7).epsilon(0.01));

    const auto p4 = wpos::estimate_parameters(powers, 4);
    CHECK(p4.psi2 == doctest::Approx(5.23e-7).epsilon(0.01));
    CHECK(p4.lambdas[2] == doctest::Approx(12.13e-7).epsilon(0.01));
    CHECK(p4.lambdas[3] == doctest::Approx(7.27e-7).epsilon(0.01));

    const std::vector<double> flat(10, 2.0);
    const auto pf = wpos::estimate_parameters(flat, 4);
    for (double l : pf.lambdas) CHECK(l == 0.0);

    CHECK_THROWS_AS(wpos::estimate_parameters(powers, 10), std::invalid_argument);
}

TEST_CASE("log-likelihood gains match the worked example")
{
    const auto powers = reference_powers();
    const double ll0 = wpos::log_likelihood(powers, 0, 2.0);
    CHECK(wpos::log_likelihood(powers, 4, 2.0) - ll0 == doctest::Approx(4.651).epsilon(0.005));
    CHECK(wpos::log_likelihood(powers, 5, 2.0) - ll0 == doctest::Approx(5.099).epsilon(0.005));
    CHECK(wpos::log_likelihood(powers, 6, 2.0) - ll0 == doctest::Approx(5.326).epsilon(0.005));

    const std::vector<double> flat(10, 2.0);
    const double f0 = wpos::log_likelihood(flat, 0, 2.0);
    for (int f : {1, 3, 6})
        CHECK(wpos::log_likelihood(flat, f, 2.0) - f0 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("thresholds and exceedance probabilities match the worked example")
{
    const auto powers = reference_powers();
    CHECK(wpos::threshold_power(powers, 4) == doctest::Approx(10.98e-7).epsilon(0.001));
    CHECK(wpos::threshold_power(powers, 5) == doctest::Approx(7.91e-7).epsilon(0.001));
    CHECK(wpos::threshold_power(powers, 6) == doctest::Approx(5.79e-7).epsilon(0.001));

    const auto p4 = wpos::exceedance_probs(wpos::estimate_parameters(powers, 4),
                                           wpos::threshold_power(powers, 4), 2.0);
    CHECK(close(p4[2], 0.92));
    CHECK(close(p4[3], 0.57));

    const auto p5 = wpos::exceedance_probs(wpos::estimate_parameters(powers, 5),
                                           wpos::threshold_power(powers, 5), 2.0);
    CHECK(close(p5[2], 0.99));
    CHECK(close(p5[3], 0.83));
    CHECK(close(p5[4], 0.52));

    const auto p6 = wpos::exceedance_probs(wpos::estimate_parameters(powers, 6),
                                           wpos::threshold_power(powers, 6), 2.0);
    CHECK(close(p6[2], 0.99));
    CHECK(close(p6[3], 0.95));
    CHECK(close(p6[4], 0.72));
    CHECK(close(p6[5], 0.35));

    // The two unprinted leading probabilities compute to ~1.
    CHECK(p5[0] > 0.999);
    CHECK(p5[1] > 0.999);
}

TEST_CASE("a huge noncentrality always exceeds the threshold")
{
    wpos::BinParameters params;
    params.psi2 = 1.0;
    params.lambdas = {1e4};
    const auto p = wpos::exceedance_probs(params, 20.0, 2.0);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("acquisition distribution against exhaustive enumeration")
{
    const std::vector<double> probs{0.3, 0.8, 0.55, 0.9};
    const auto dp = wpos::acquisition_probs(probs);

    std::vector<double> brute(probs.size() + 1, 0.0);
    for (unsigned mask = 0; mask < (1u << probs.size()); ++mask) {
        double p = 1.0;
        int ones = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (mask & (1u << i)) {
                p *= probs[i];
                ++ones;
            } else {
                p *= 1.0 - probs[i];
            }
        }
        brute[ones] += p;
    }
    for (std::size_t f = 0; f < dp.size(); ++f)
        CHECK(dp[f] == doctest::Approx(brute[f]).epsilon(1e-12));

    const auto halves = wpos::acquisition_probs({0.5, 0.5, 0.5});
    CHECK(halves[0] == doctest::Approx(1.0 / 8));
    CHECK(halves[1] == doctest::Approx(3.0 / 8));
    CHECK(halves[2] == doctest::Approx(3.0 / 8));
    CHECK(halves[3] == doctest::Approx(1.0 / 8));

    const auto sure = wpos::acquisition_probs({1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(sure[5] == doctest::Approx(1.0));
    for (int f = 0; f < 5; ++f) CHECK(sure[f] == doctest::Approx(0.0));
}

TEST_CASE("acquisition distributions sum to one")
{
    RandomStream rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> probs(1 + static_cast<int>(rng.uniform() * 12));
        for (double& p : probs) p = rng.uniform();
        const auto dp = wpos::acquisition_probs(probs);
        double total = 0.0, expected = 0.0;
        for (std::size_t f = 0; f < dp.size(); ++f) {
            total += dp[f];
            expected += dp[f] * static_cast<double>(f);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        // Expectation identity: sum_f P_f f = sum_n p_n.
        double direct = 0.0;
        for (double p : probs) direct += p;
        CHECK(expected == doctest::Approx(direct).epsilon(1e-9));
    }
    CHECK_THROWS_AS(wpos::acquisition_probs({0.5, 1.2}), std::invalid_argument);
}

TEST_CASE("acquisition rows of the worked example")
{
    const auto powers = reference_powers();
    const auto row5 = wpos::acquisition_probs(wpos::exceedance_probs(
        wpos::estimate_parameters(powers, 5), wpos::threshold_power(powers, 5), 2.0));
    CHECK(close(row5[3], 0.09));
    CHECK(close(row5[4], 0.49));
    CHECK(close(row5[5], 0.42));

    const auto row4 = wpos::acquisition_probs(wpos::exceedance_probs(
        wpos::estimate_parameters(powers, 4), wpos::threshold_power(powers, 4), 2.0));
    CHECK(close(row4[3], 0.44));
    CHECK(close(row4[4], 0.53));

    const auto row6 = wpos::acquisition_probs(wpos::exceedance_probs(
        wpos::estimate_parameters(powers, 6), wpos::threshold_power(powers, 6), 2.0));
    CHECK(close(row6[3], 0.01));
    CHECK(close(row6[4], 0.20));
    CHECK(close(row6[5], 0.55));
    CHECK(close(row6[6], 0.24));
}

TEST_CASE("likelihood tables reproduce the printed information terms")
{
    const auto tables = wpos::build_likelihood_tables(reference_powers(), reference_config());
    REQUIRE(tables.rows.size() == 6);

    double max_gain = 0.0;
    for (const auto& row : tables.rows) max_gain = std::max(max_gain, row.ll_gain);
    auto term_a = [&](int f) {
        const auto& row = tables.rows[f - 3];
        return row.info_weight * row.ll_gain / max_gain;
    };
    CHECK(term_a(4) == doctest::Approx(0.7213).epsilon(0.02));
    CHECK(term_a(5) == doctest::Approx(0.7857).epsilon(0.02));
    CHECK(term_a(6) == doctest::Approx(0.7912).epsilon(0.02));
}

TEST_CASE("criterion combination and argmax")
{
    // Worked-example terms: (a) from the likelihood side, (b) implied by the
    // printed criterion row {0.79, 0.76, 0.89, 0.88, 0.87, 0.85}.
    const std::vector<double> term_a{0.6547, 0.7216, 0.7858, 0.7913, 0.7942, 0.7836};
    const std::vector<double> term_b{0.9253, 0.7984, 0.9942, 0.9687, 0.9458, 0.9164};
    const auto result = wpos::combine_injected(term_a, term_b, 0.5, 3);
    const std::vector<double> printed{0.79, 0.76, 0.89, 0.88, 0.87, 0.85};
    for (std::size_t i = 0; i < printed.size(); ++i)
        CHECK(result.criterion[i] == doctest::Approx(printed[i]).epsilon(0.015));
    CHECK(result.f_star == 5);

    // Weight endpoint: only the printed information terms decide.
    const auto endpoint =
        wpos::combine_injected({0.7213, 0.7857, 0.7912}, {0.99, 1.0, 0.978}, 1.0, 4);
    CHECK(endpoint.f_star == 6);

    // All-equal criterion falls back to the smallest F.
    const auto ties = wpos::combine_injected({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, 0.7, 4);
    CHECK(ties.f_star == 4);
}

TEST_CASE("the selected size is invariant to uniform power scaling")
{
    const auto base = wpos::build_likelihood_tables(reference_powers(), reference_config());
    auto scaled_powers = reference_powers();
    for (double& x : scaled_powers) x *= 1234.5;
    const auto scaled = wpos::build_likelihood_tables(scaled_powers, reference_config());

    for (std::size_t i = 0; i < base.rows.size(); ++i) {
        CHECK(scaled.rows[i].ll_gain == doctest::Approx(base.rows[i].ll_gain).epsilon(1e-9));
        CHECK(scaled.rows[i].info_weight
              == doctest::Approx(base.rows[i].info_weight).epsilon(1e-9));
    }
}

TEST_CASE("knn divergence sanity on matched and separated Gaussians")
{
    RandomStream rng(52);
    const int n = 1500, u = 30;

    std::vector<std::vector<double>> x, y, z;
    for (int i = 0; i < n; ++i) {
        x.push_back({rng.normal()});
        y.push_back({rng.normal() + 1.0});
        z.push_back({rng.normal()});
    }

    // Self-divergence via the same object collapses to log(n / (n - 1)).
    CHECK(std::fabs(wpos::knn_kl(x, x, u, 1.0)) <= std::log(n / double(n - 1)) + 1e-12);

    // Matched independent samples stay near zero.
    CHECK(std::fabs(wpos::knn_kl(x, z, u, 1.0)) < 0.1);

    // Separated Gaussians approach the closed form 0.5 and are asymmetric in
    // sampled value.
    const double forward = wpos::knn_kl(x, y, u, 1.0);
    const double backward = wpos::knn_kl(y, x, u, 1.0);
    CHECK(forward == doctest::Approx(0.5).epsilon(0.15));
    CHECK(forward != backward);

    CHECK_THROWS_AS(wpos::knn_kl(x, y, n + 1, 1.0), std::invalid_argument);
}

TEST_CASE("duplicate points are perturbed instead of crashing")
{
    std::vector<std::vector<double>> from, to;
    for (int i = 0; i < 10; ++i) {
        from.push_back({0.5});           // all identical: nearest distances are 0
        to.push_back({0.5 + 0.1 * i});
    }
    int fixups = 0;
    const double value = wpos::knn_kl(from, to, 2, 1.0, &fixups);
    CHECK(std::isfinite(value));
    CHECK(fixups == 10);
}

TEST_CASE("self-divergence shrinks as the sample grows")
{
    RandomStream rng(53);
    double previous = 1e9;
    for (int n : {500, 1000, 2000}) {
        std::vector<double> abs_values;
        for (int rep = 0; rep < 3; ++rep) {
            std::vector<std::vector<double>> a, b;
            for (int i = 0; i < n; ++i) {
                a.push_back({rng.normal(), rng.normal()});
                b.push_back({rng.normal(), rng.normal()});
            }
            abs_values.push_back(std::fabs(wpos::knn_kl(a, b, 10, 2.0)));
        }
        std::sort(abs_values.begin(), abs_values.end());
        const double median = abs_values[1];
        CHECK(median < previous);
        previous = median;
    }
}

TEST_CASE("mean divergence over identical zones is near zero and scale-free")
{
    RandomStream rng(54);
    std::vector<std::vector<std::vector<double>>> zones(4);
    for (auto& zone : zones)
        for (int i = 0; i < 400; ++i) zone.push_back({rng.normal(), rng.normal()});

    const double kl = wpos::mean_kl(zones, 10, 5, 5.0);
    CHECK(std::fabs(kl) < 0.05);

    auto scaled = zones;
    for (auto& zone : scaled)
        for (auto& v : zone)
            for (double& x : v) x *= 42.0;
    CHECK(wpos::mean_kl(scaled, 10, 5, 5.0) == doctest::Approx(kl).epsilon(1e-9));
}

TEST_CASE("full selection wiring over synthetic zone data")
{
    // Zones drawn from shifted Gaussians so the divergence term is active.
    RandomStream rng(55);
    const auto powers = reference_powers();
    SelectionConfig config = reference_config();
    config.knn_neighbors = 10;

    std::vector<std::vector<std::vector<std::vector<double>>>> per_f;
    for (int f = config.f_min; f <= config.f_max; ++f) {
        std::vector<std::vector<std::vector<double>>> zones(3);
        for (std::size_t z = 0; z < zones.size(); ++z)
            for (int i = 0; i < 150; ++i) {
                std::vector<double> v(2 * f);
                for (double& x : v) x = rng.normal() + 0.8 * static_cast<double>(z);
                zones[z].push_back(std::move(v));
            }
        per_f.push_back(std::move(zones));
    }

    const auto tables = wpos::select_feature_size(powers, per_f, config);
    CHECK(tables.f_star >= config.f_min);
    CHECK(tables.f_star <= config.f_max);
    CHECK_FALSE(tables.ll_gain_degenerate);
    CHECK_FALSE(tables.kl_degenerate);
    for (const auto& row : tables.rows) {
        CHECK(row.term_a >= 0.0);
        CHECK(row.term_a <= 1.0 + 1e-12);
        CHECK(row.term_b >= 0.0);
        CHECK(row.term_b <= 1.0 + 1e-12);
        double total = 0.0;
        for (double p : row.acq_probs) total += p;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
}
