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

#ifndef WPOS_PDP_HPP
#define WPOS_PDP_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wpos/channel.hpp"
#include "wpos/geometry.hpp"
#include "wpos/rng.hpp"

namespace wpos {

/// Energy-detection receiver parameters. The degrees of freedom follow from
/// bandwidth and integration period: nu = 2 W T_g.
struct DetectionParams {
    double bandwidth_hz = 2e9;
    double frame_ns = 200.0;
    double bin_ns = 2.0;
    double snr_db = 15.0;

    int bin_count() const { return static_cast<int>(frame_ns / bin_ns); }
    double dof() const { return 2.0 * bandwidth_hz * bin_ns * 1e-9; }

    void validate() const
    {
        if (!(bandwidth_hz > 0.0 && frame_ns > 0.0 && bin_ns > 0.0))
            throw std::invalid_argument("pdp: detection parameters must be > 0");
        if (bin_count() < 1) throw std::invalid_argument("pdp: at least one bin required");
        if (!(dof() >= 1.0)) throw std::invalid_argument("pdp: degrees of freedom must be >= 1");
    }
};

/// One frame's per-bin powers for a single sensor, linear units.
using PdpVector = std::vector<double>;

/// Sums each ray's squared amplitude into its containing temporal bin.
/// Returns one bin-energy vector per sensor; total energy is conserved.
inline std::vector<std::vector<double>> deposit_energy(const ChannelRealization& realization,
                                                       const DetectionParams& detection)
{
    const int bins = detection.bin_count();
    const double window_ns = bins * detection.bin_ns;
    std::vector<std::vector<double>> energies(realization.sensor_rays.size(),
                                              std::vector<double>(bins, 0.0));
    for (std::size_t m = 0; m < realization.sensor_rays.size(); ++m) {
        for (const Ray& ray : realization.sensor_rays[m]) {
            if (ray.arrival_ns >= window_ns)
                throw std::invalid_argument("pdp: ray arrival beyond the integration window");
            const int bin = static_cast<int>(ray.arrival_ns / detection.bin_ns);
            energies[m][bin] += ray.amplitude * ray.amplitude;
        }
    }
    return energies;
}

/// Direct-path mean-square gain at a fixed distance with unit shadowing and
/// zero excess delays.
inline double los_pathloss_at(const ChannelParams& params, double distance_m)
{
    return pathloss(params, distance_m, 1.0, 1.0, 0.0, 0.0);
}

/// Monte-Carlo mean of the direct-path gain over the target space, averaged
/// over sensors, with shadowing averaged out. Deterministic given the seed.
inline double mean_los_pathloss(const ChannelParams& params, const SceneConfig& scene,
                                std::size_t samples, std::uint64_t seed)
{
    if (samples == 0) throw std::invalid_argument("pdp: calibration needs samples");
    RandomStream rng(seed);
    double total = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const Vec3 target = sample_target_location(scene, rng);
        double per_sensor = 0.0;
        for (const Vec3& sensor : scene.sensors)
            per_sensor += los_pathloss_at(params, distance(target, sensor));
        total += per_sensor / static_cast<double>(scene.sensor_count());
    }
    return total / static_cast<double>(samples);
}

/// Noise level from the target SNR definition: sigma^2 = E[beta_los] / SNR.
inline double noise_level(double mean_los_gain, double snr_db)
{
    return mean_los_gain / std::pow(10.0, snr_db / 10.0);
}

/// Calibrated per-sensor noise level; identical across sensors since the SNR
/// definition uses the same target-space expectation for every sensor.
inline double calibrate_noise(const ChannelParams& params, const SceneConfig& scene,
                              const DetectionParams& detection, std::size_t samples = 100000,
                              std::uint64_t seed = 0x5eedca11b8a7e0ULL)
{
    return noise_level(mean_los_pathloss(params, scene, samples, seed), detection.snr_db);
}

/// Draws one measured bin power: scaled noncentral chi-square with nu degrees
/// of freedom and noncentrality nu E / sigma^2, so E[eps] = sigma^2 + E.
/// Noise-only bins (E = 0) follow the central law with mean sigma^2.
inline double synthesize_bin(double energy, double sigma2, double nu, RandomStream& rng)
{
    if (!(sigma2 > 0.0)) throw std::invalid_argument("pdp: noise level must be > 0");
    if (energy < 0.0) throw std::invalid_argument("pdp: bin energy must be >= 0");
    const double noncentrality = nu * energy / sigma2;
    return (sigma2 / nu) * rng.noncentral_chi_square(nu, noncentrality);
}

/// Synthesizes the full PDP vector for one sensor from its bin energies.
inline PdpVector synthesize_pdp(const std::vector<double>& energies, double sigma2, double nu,
                                RandomStream& rng)
{
    PdpVector pdp(energies.size());
    for (std::size_t n = 0; n < energies.size(); ++n)
        pdp[n] = synthesize_bin(energies[n], sigma2, nu, rng);
    return pdp;
}

/// Full measurement for one target: channel realization, energy deposit, and
/// per-bin synthesis for every sensor.
inline std::vector<PdpVector> measure_frame(const SceneConfig& scene, const Scenario& scenario,
                                            const ChannelParams& params,
                                            const DetectionParams& detection, double sigma2,
                                            const Vec3& target, RandomStream& rng,
                                            int* frame_redraws = nullptr)
{
    const double window_ns = detection.bin_count() * detection.bin_ns;
    const ChannelRealization realization =
        realize_channel(scene, scenario, params, target, window_ns, rng);
    if (frame_redraws != nullptr) *frame_redraws += realization.frame_redraws;
    const auto energies = deposit_energy(realization, detection);
    std::vector<PdpVector> frames;
    frames.reserve(energies.size());
    for (const auto& sensor_energy : energies)
        frames.push_back(synthesize_pdp(sensor_energy, sigma2, detection.dof(), rng));
    return frames;
}

} // namespace wpos

#endif // WPOS_PDP_HPP
