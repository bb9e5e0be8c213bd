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

#ifndef WPOS_GEOMETRY_HPP
#define WPOS_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wpos/rng.hpp"

namespace wpos {

/// Speed of light in meters per nanosecond; all delays are kept in ns.
inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double radius_xy() const { return std::hypot(x, y); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

/// Sensor-space box (d_x x d_y x d_z) and target-space cylinder (radius d_r,
/// height d_h), both centered at the origin. The box must sit strictly inside
/// the cylinder.
struct SceneConfig {
    double d_x = 6.0;
    double d_y = 3.0;
    double d_z = 2.0;
    double d_r = 10.0;
    double d_h = 4.0;
    std::vector<Vec3> sensors;
    double c = kSpeedOfLightMPerNs;

    std::size_t sensor_count() const { return sensors.size(); }

    bool inside_sensor_box(const Vec3& p) const
    {
        return std::fabs(p.x) <= 0.5 * d_x && std::fabs(p.y) <= 0.5 * d_y
               && std::fabs(p.z) <= 0.5 * d_z;
    }

    void validate() const
    {
        if (!(d_x > 0.0 && d_y > 0.0 && d_z > 0.0 && d_r > 0.0 && d_h > 0.0))
            throw std::invalid_argument("geometry: scene lengths must be > 0");
        if (!(d_h > d_z))
            throw std::invalid_argument("geometry: cylinder height must exceed box height");
        if (!(d_r > std::hypot(0.5 * d_x, 0.5 * d_y)))
            throw std::invalid_argument("geometry: cylinder radius must exceed box footprint");
        if (sensors.empty()) throw std::invalid_argument("geometry: no sensors configured");
        for (const Vec3& s : sensors)
            if (!inside_sensor_box(s))
                throw std::invalid_argument("geometry: sensor outside the sensor box");
    }
};

/// Planar zone partition: equal-width rings over [0, d_r] crossed with
/// equal-angle sectors over [0, 2 pi).
struct ZoneLayout {
    int n_rings = 2;
    int n_sectors = 4;
    std::vector<double> ring_bounds;   // upper radius of each ring, last == d_r
    std::vector<double> sector_bounds; // upper angle of each sector, last == 2 pi

    int zone_count() const { return n_rings * n_sectors; }

    void validate() const
    {
        if (n_rings < 1 || n_sectors < 1)
            throw std::invalid_argument("geometry: zone layout needs >= 1 ring and sector");
        if (ring_bounds.size() != static_cast<std::size_t>(n_rings)
            || sector_bounds.size() != static_cast<std::size_t>(n_sectors))
            throw std::invalid_argument("geometry: zone boundary count mismatch");
        double prev = 0.0;
        for (double b : ring_bounds) {
            if (!(b > prev)) throw std::invalid_argument("geometry: ring bounds not increasing");
            prev = b;
        }
    }
};

inline ZoneLayout make_zone_layout(int n_rings, int n_sectors, double d_r)
{
    ZoneLayout layout;
    layout.n_rings = n_rings;
    layout.n_sectors = n_sectors;
    layout.ring_bounds.resize(n_rings);
    layout.sector_bounds.resize(n_sectors);
    for (int i = 0; i < n_rings; ++i) layout.ring_bounds[i] = d_r * (i + 1) / n_rings;
    const double two_pi = 2.0 * RandomStream::pi();
    for (int i = 0; i < n_sectors; ++i) layout.sector_bounds[i] = two_pi * (i + 1) / n_sectors;
    layout.validate();
    return layout;
}

/// The 8 box corners plus the 4 face midpoints at z = 0. Only defined for 12
/// sensors; other counts require explicit positions.
inline std::vector<Vec3> default_sensor_positions(double d_x, double d_y, double d_z,
                                                  std::size_t count = 12)
{
    if (count != 12)
        throw std::invalid_argument("geometry: default placement is defined for 12 sensors only");
    const double hx = 0.5 * d_x, hy = 0.5 * d_y, hz = 0.5 * d_z;
    std::vector<Vec3> sensors;
    sensors.reserve(12);
    for (double sx : {-1.0, 1.0})
        for (double sy : {-1.0, 1.0})
            for (double sz : {-1.0, 1.0}) sensors.push_back({sx * hx, sy * hy, sz * hz});
    sensors.push_back({hx, 0.0, 0.0});
    sensors.push_back({-hx, 0.0, 0.0});
    sensors.push_back({0.0, hy, 0.0});
    sensors.push_back({0.0, -hy, 0.0});
    return sensors;
}

inline SceneConfig make_default_scene()
{
    SceneConfig scene;
    scene.sensors = default_sensor_positions(scene.d_x, scene.d_y, scene.d_z);
    scene.validate();
    return scene;
}

/// Uniform point in the cylinder of the given radius and height (area-uniform
/// in the disk via the square-root transform).
inline Vec3 sample_cylinder_point(double radius, double height, RandomStream& rng)
{
    const double r = radius * std::sqrt(rng.uniform());
    const double angle = rng.uniform(0.0, 2.0 * RandomStream::pi());
    const double z = rng.uniform(-0.5 * height, 0.5 * height);
    return {r * std::cos(angle), r * std::sin(angle), z};
}

/// Uniform target location inside the cylinder and outside the sensor box,
/// by rejection. Throws when the acceptance region is (near-)empty.
inline Vec3 sample_target_location(const SceneConfig& scene, RandomStream& rng)
{
    constexpr int kMaxAttempts = 4000000; // acceptance below ~1e-6 is degenerate
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const Vec3 p = sample_cylinder_point(scene.d_r, scene.d_h, rng);
        if (!scene.inside_sensor_box(p)) return p;
    }
    throw std::runtime_error("geometry: target sampling failed; sensor box covers the cylinder");
}

/// Zone index of a point: ring index times sector count plus sector index.
/// Zones are planar; z is ignored.
inline int zone_of(const ZoneLayout& layout, const Vec3& point)
{
    const double radius = point.radius_xy();
    const double d_r = layout.ring_bounds.back();
    if (radius > d_r * (1.0 + 1e-12))
        throw std::invalid_argument("geometry: point outside the target radius");

    int ring = 0;
    while (ring + 1 < layout.n_rings && radius >= layout.ring_bounds[ring]) ++ring;

    double angle = std::atan2(point.y, point.x);
    if (angle < 0.0) angle += 2.0 * RandomStream::pi();
    int sector = 0;
    while (sector + 1 < layout.n_sectors && angle >= layout.sector_bounds[sector]) ++sector;

    return ring * layout.n_sectors + sector;
}

} // namespace wpos

#endif // WPOS_GEOMETRY_HPP
