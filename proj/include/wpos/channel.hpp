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

#ifndef WPOS_CHANNEL_HPP
#define WPOS_CHANNEL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wpos/geometry.hpp"
#include "wpos/rng.hpp"

namespace wpos {

/// Cluster/ray channel parameters. Decay constants and inter-arrival times
/// are in ns, the reference power in dBm, shadowing and Nakagami-mu
/// parameters in dB.
struct ChannelParams {
    double mean_cluster_count = 3.0;   // Poisson mean of the cluster count
    int rays_per_path = 6;             // fixed ray count per path
    double ray_interarrival_ns = 1.5;  // mean exponential gap between rays
    double path_decay_ns = 25.0;       // cluster-delay decay constant
    double ray_decay_ns = 5.0;         // ray-delay decay constant
    double pathloss_exponent = 2.0;
    double reference_power_dbm = -45.0;
    double reference_distance_m = 1.0;
    double shadow_var_db = 3.0;
    double nakagami_mu_mean_db = 0.67;
    double nakagami_mu_var_db = 0.28;

    double reference_power_linear() const { return std::pow(10.0, reference_power_dbm / 10.0); }

    void validate() const
    {
        if (mean_cluster_count < 0.0)
            throw std::invalid_argument("channel: mean cluster count must be >= 0");
        if (rays_per_path < 1) throw std::invalid_argument("channel: rays per path must be >= 1");
        if (!(ray_interarrival_ns > 0.0 && path_decay_ns > 0.0 && ray_decay_ns > 0.0))
            throw std::invalid_argument("channel: decay constants must be > 0");
        if (!(reference_distance_m > 0.0))
            throw std::invalid_argument("channel: reference distance must be > 0");
        if (!(shadow_var_db > 0.0) || !(nakagami_mu_var_db > 0.0))
            throw std::invalid_argument("channel: variances must be > 0");
    }
};

/// Environment draw frozen for the lifetime of one scenario: cluster
/// geometry plus sensor and path shadowing (linear scale). Index 0 of
/// path_shadow belongs to the direct path.
struct Scenario {
    std::vector<Vec3> clusters;
    std::vector<double> sensor_shadow;
    std::vector<double> path_shadow;
    bool los_enabled = true;

    std::size_t path_count() const { return clusters.size() + 1; }
};

/// One resolved multipath arrival at one sensor.
struct Ray {
    double arrival_ns = 0.0;       // absolute: d/c + path delay + ray delay
    double amplitude = 0.0;        // Nakagami fading amplitude a
    double mean_square_gain = 0.0; // beta = E[a^2]
    double phase = 0.0;            // uniform phase, unused by energy detection
    std::uint16_t path = 0;
    std::uint16_t ray = 0;
};

/// All arrivals for one measurement, grouped per sensor.
struct ChannelRealization {
    std::vector<std::vector<Ray>> sensor_rays;
    int frame_redraws = 0; // realizations rejected for exceeding the frame
};

/// Zero-mean log-normal shadowing in linear scale: 10^(X/10) with
/// X ~ N(0, var_db).
inline double sample_shadowing(double var_db, RandomStream& rng)
{
    return std::pow(10.0, rng.normal(0.0, std::sqrt(var_db)) / 10.0);
}

/// Per-ray Nakagami shape parameter, log-normal in dB and clipped at the
/// validity bound 0.5.
inline double sample_nakagami_mu(const ChannelParams& params, RandomStream& rng)
{
    const double mu_db = rng.normal(params.nakagami_mu_mean_db, std::sqrt(params.nakagami_mu_var_db));
    const double mu = std::pow(10.0, mu_db / 10.0);
    return mu < 0.5 ? 0.5 : mu;
}

/// Upper bound, over all targets in the cylinder, of the delay of the slowest
/// deterministic arrival (ray spread excluded), in ns.
inline double scenario_max_deterministic_delay_ns(const SceneConfig& scene,
                                                  const Scenario& scenario)
{
    auto max_target_distance = [&scene](const Vec3& p) {
        return std::hypot(p.radius_xy() + scene.d_r, 0.5 * scene.d_h + std::fabs(p.z));
    };
    double worst = 0.0;
    for (const Vec3& sensor : scene.sensors) {
        worst = std::max(worst, max_target_distance(sensor)); // direct path
        for (const Vec3& cluster : scenario.clusters)
            worst = std::max(worst,
                             max_target_distance(cluster) + distance(sensor, cluster));
    }
    return worst / scene.c;
}

/// Draws the frozen per-scenario state: Poisson cluster count, uniform
/// cluster locations in the target cylinder, and one shadowing value per
/// sensor and per path. When a frame bound is given, cluster geometry whose
/// worst-case deterministic delay leaves no room for ray spread is resampled
/// rather than truncated.
inline Scenario generate_scenario(const ChannelParams& params, const SceneConfig& scene, bool los,
                                  RandomStream& rng,
                                  double frame_ns = std::numeric_limits<double>::infinity())
{
    params.validate();
    scene.validate();

    constexpr int kMaxResamples = 1000;
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        Scenario scenario;
        scenario.los_enabled = los;
        const std::uint64_t cluster_count = rng.poisson(params.mean_cluster_count);
        scenario.clusters.reserve(cluster_count);
        for (std::uint64_t l = 0; l < cluster_count; ++l)
            scenario.clusters.push_back(sample_cylinder_point(scene.d_r, scene.d_h, rng));

        scenario.sensor_shadow.reserve(scene.sensor_count());
        for (std::size_t m = 0; m < scene.sensor_count(); ++m)
            scenario.sensor_shadow.push_back(sample_shadowing(params.shadow_var_db, rng));

        scenario.path_shadow.reserve(scenario.path_count());
        for (std::size_t l = 0; l < scenario.path_count(); ++l)
            scenario.path_shadow.push_back(sample_shadowing(params.shadow_var_db, rng));

        if (scenario_max_deterministic_delay_ns(scene, scenario) < 0.95 * frame_ns)
            return scenario;
    }
    throw std::runtime_error("channel: cluster geometry never fits the frame duration");
}

/// Excess delay of a cluster path relative to the direct path, in ns. The
/// direct path (no cluster) has zero excess delay by definition.
inline double cluster_excess_delay(const Vec3& target, const Vec3& cluster, const Vec3& sensor,
                                   double c = kSpeedOfLightMPerNs)
{
    const double direct = distance(target, sensor);
    const double detour = distance(cluster, target) + distance(sensor, cluster);
    const double delay = (detour - direct) / c;
    return delay > 0.0 ? delay : 0.0; // triangle inequality; clamp rounding
}

/// Relative ray delays: first ray at 0, then exponential gaps with the given
/// mean. Nondecreasing by construction.
inline std::vector<double> ray_delays(int ray_count, double mean_gap_ns, RandomStream& rng)
{
    if (ray_count < 1) throw std::invalid_argument("channel: ray count must be >= 1");
    std::vector<double> delays(ray_count);
    delays[0] = 0.0;
    for (int k = 1; k < ray_count; ++k) delays[k] = delays[k - 1] + rng.exponential(mean_gap_ns);
    return delays;
}

/// Mean-square path gain: reference power scaled by distance pathloss,
/// shadowing, and the exponential path/ray decays. Linear power units.
inline double pathloss(const ChannelParams& params, double distance_m, double sensor_shadow,
                       double path_shadow, double path_delay_ns, double ray_delay_ns)
{
    if (!(distance_m > 0.0)) throw std::invalid_argument("channel: distance must be > 0");
    return params.reference_power_linear()
           * std::pow(distance_m / params.reference_distance_m, -params.pathloss_exponent)
           * sensor_shadow * path_shadow
           * std::exp(-path_delay_ns / params.path_decay_ns - ray_delay_ns / params.ray_decay_ns);
}

/// Nakagami-mu amplitude with scale omega = E[a^2].
inline double nakagami_amplitude(double mu, double omega, RandomStream& rng)
{
    return rng.nakagami(mu, omega);
}

/// Resolves every (path, ray) arrival for one target measurement. The frame
/// bound is enforced by redrawing; redraw counts are reported on the result.
inline ChannelRealization realize_channel(const SceneConfig& scene, const Scenario& scenario,
                                          const ChannelParams& params, const Vec3& target,
                                          double frame_ns, RandomStream& rng)
{
    constexpr int kMaxRedraws = 1000;
    const std::size_t sensor_count = scene.sensor_count();

    ChannelRealization realization;
    realization.sensor_rays.assign(sensor_count, {});

    for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
        bool overflow = false;
        for (std::size_t m = 0; m < sensor_count && !overflow; ++m) {
            auto& rays = realization.sensor_rays[m];
            rays.clear();
            const double d_m = distance(target, scene.sensors[m]);
            const double toa_ns = d_m / scene.c;

            for (std::size_t l = 0; l < scenario.path_count() && !overflow; ++l) {
                const double path_delay =
                    (l == 0) ? 0.0
                             : cluster_excess_delay(target, scenario.clusters[l - 1],
                                                    scene.sensors[m], scene.c);
                const std::vector<double> gaps =
                    ray_delays(params.rays_per_path, params.ray_interarrival_ns, rng);
                for (int k = 0; k < params.rays_per_path; ++k) {
                    const double arrival = toa_ns + path_delay + gaps[k];
                    if (arrival >= frame_ns) {
                        overflow = true;
                        break;
                    }
                    const double beta = pathloss(params, d_m, scenario.sensor_shadow[m],
                                                 scenario.path_shadow[l], path_delay, gaps[k]);
                    const double mu = sample_nakagami_mu(params, rng);
                    const bool blocked = (l == 0 && !scenario.los_enabled);
                    Ray ray;
                    ray.arrival_ns = arrival;
                    ray.amplitude = blocked ? 0.0 : nakagami_amplitude(mu, beta, rng);
                    ray.mean_square_gain = beta;
                    ray.phase = rng.uniform(0.0, 2.0 * RandomStream::pi());
                    ray.path = static_cast<std::uint16_t>(l);
                    ray.ray = static_cast<std::uint16_t>(k);
                    rays.push_back(ray);
                }
            }
        }
        if (!overflow) return realization;
        ++realization.frame_redraws;
    }
    throw std::runtime_error("channel: arrivals persistently exceed the frame duration");
}

} // namespace wpos

#endif // WPOS_CHANNEL_HPP
