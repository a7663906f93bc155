// SPDX-License-Identifier: Apache-2.0
//
// risblock - RIS-assisted blockage prediction workbench
// Copyright (C) 2026 The risblock authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "risblock/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risblock
{

namespace
{

constexpr int kMarkerRadius = 1; // BS and RIS markers, pixels
constexpr int kUeMarkerRadius = 4;

double uniform(Rng &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

void draw_square(RenderedImage &img, int row, int col, int radius, int channel)
{
    for (int r = row - radius; r <= row + radius; ++r)
        for (int c = col - radius; c <= col + radius; ++c)
            if (r >= 0 && r < img.dims.height && c >= 0 && c < img.dims.width)
                img.at(r, c, channel) = 1.0f;
}

MultipathComponent los_path(double dist, double lambda, double azimuth, const MpcSettings &settings)
{
    MultipathComponent p;
    p.delay_s = dist / kSpeedOfLight;
    p.amplitude = lambda / (4.0 * std::numbers::pi * dist);
    p.sampling_time_s = settings.sampling_time_s;
    p.cyclic_prefix_count = settings.cyclic_prefix_count;
    p.azimuth_rad = azimuth;
    p.elevation_rad = 0.0;
    return p;
}

// Scatterer bounce relative to the line-of-sight path of the same link.
MultipathComponent scattered_path(const MultipathComponent &los, Rng &rng)
{
    constexpr double max_elevation = std::numbers::pi / 6.0;
    MultipathComponent p = los;
    p.delay_s = los.delay_s * uniform(rng, 1.1, 3.0);
    p.amplitude = los.amplitude * uniform(rng, 0.05, 0.3) * std::polar(1.0, uniform(rng, 0.0, kTwoPi));
    p.azimuth_rad = uniform(rng, 0.0, kTwoPi);
    p.elevation_rad = uniform(rng, -max_elevation, max_elevation);
    p.departure_azimuth_rad = uniform(rng, 0.0, kTwoPi);
    p.departure_elevation_rad = uniform(rng, -max_elevation, max_elevation);
    return p;
}

double checked_distance(Point2 a, Point2 b)
{
    const double d = distance(a, b);
    if (!(d > 0.0))
        throw std::invalid_argument("link endpoints coincide");
    return d;
}

} // namespace

double distance(Point2 a, Point2 b)
{
    return std::hypot(b.x - a.x, b.y - a.y);
}

double bearing(Point2 from, Point2 to)
{
    double a = std::atan2(to.y - from.y, to.x - from.x);
    if (a < 0.0)
        a += kTwoPi;
    if (a >= kTwoPi)
        a = 0.0;
    return a;
}

bool Rect::contains(Point2 p) const
{
    return p.x >= min_x() && p.x <= max_x() && p.y >= min_y() && p.y <= max_y();
}

bool Scene::inside(Point2 p) const
{
    return p.x >= 0.0 && p.x <= width_m && p.y >= 0.0 && p.y <= depth_m;
}

void Scene::validate() const
{
    if (!(width_m > 0.0) || !(depth_m > 0.0))
        throw std::invalid_argument("scene bounds must be positive");
    if (!inside(bs) || !inside(ris))
        throw std::invalid_argument("BS and RIS must lie inside the scene bounds");
    for (const auto &b : blockers)
        if (!(b.half_width > 0.0) || !(b.half_height > 0.0))
            throw std::invalid_argument("blockers must have positive extents");
    if (los_blocked(bs, ris, blockers))
        throw std::invalid_argument("a blocker obstructs the BS-RIS link");
    if (!(penetration_loss_db >= 0.0))
        throw std::invalid_argument("penetration loss must be non-negative");
}

int class_index(LinkStatus s)
{
    switch (s)
    {
    case LinkStatus::Absent:
        return 0;
    case LinkStatus::Unblocked:
        return 1;
    case LinkStatus::Blocked:
        return 2;
    }
    throw std::invalid_argument("unknown link status");
}

LinkStatus status_from_class(int index)
{
    switch (index)
    {
    case 0:
        return LinkStatus::Absent;
    case 1:
        return LinkStatus::Unblocked;
    case 2:
        return LinkStatus::Blocked;
    }
    throw std::invalid_argument("class index must be 0, 1 or 2");
}

LinkStatus status_from_code(int code)
{
    if (code < -1 || code > 1)
        throw std::invalid_argument("link status code must be -1, 0 or 1");
    return static_cast<LinkStatus>(code);
}

std::string_view to_string(LinkStatus s)
{
    switch (s)
    {
    case LinkStatus::Absent:
        return "absent";
    case LinkStatus::Unblocked:
        return "unblocked";
    case LinkStatus::Blocked:
        return "blocked";
    }
    return "unknown";
}

bool los_blocked(Point2 a, Point2 b, std::span<const Rect> blockers)
{
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    for (const auto &rect : blockers)
    {
        double t_lo = 0.0;
        double t_hi = 1.0;
        bool miss = false;
        const double origin[2] = {a.x, a.y};
        const double dir[2] = {dx, dy};
        const double lo[2] = {rect.min_x(), rect.min_y()};
        const double hi[2] = {rect.max_x(), rect.max_y()};
        for (int axis = 0; axis < 2 && !miss; ++axis)
        {
            if (dir[axis] == 0.0)
            {
                if (origin[axis] < lo[axis] || origin[axis] > hi[axis])
                    miss = true;
                continue;
            }
            double t0 = (lo[axis] - origin[axis]) / dir[axis];
            double t1 = (hi[axis] - origin[axis]) / dir[axis];
            if (t0 > t1)
                std::swap(t0, t1);
            t_lo = std::max(t_lo, t0);
            t_hi = std::min(t_hi, t1);
            if (t_lo > t_hi)
                miss = true;
        }
        // open segment: a clip that collapses onto an endpoint does not count
        if (!miss && t_hi > 0.0 && t_lo < 1.0)
            return true;
    }
    return false;
}

LinkStatus link_status(const Scene &scene, std::optional<Point2> ue)
{
    if (!ue)
        return LinkStatus::Absent;
    if (!scene.inside(*ue))
        throw std::invalid_argument("UE position lies outside the scene bounds");
    return los_blocked(scene.bs, *ue, scene.blockers) ? LinkStatus::Blocked : LinkStatus::Unblocked;
}

PathSet synthesize_mpcs(const Scene &scene, std::optional<Point2> ue, LinkStatus status,
                        const PropagationConfig &cfg, const MpcSettings &settings, Rng &rng)
{
    if (settings.paths_bs_ue < 1 || settings.paths_bs_ris < 1 || settings.paths_ris_ue < 1)
        throw std::invalid_argument("every link needs at least one path");
    const double lambda = cfg.wavelength_m();
    PathSet out;

    {
        const double d = checked_distance(scene.bs, scene.ris);
        auto los = los_path(d, lambda, bearing(scene.ris, scene.bs), settings);
        los.departure_azimuth_rad = bearing(scene.bs, scene.ris);
        out.bs_ris.push_back(los);
        for (int k = 1; k < settings.paths_bs_ris; ++k)
            out.bs_ris.push_back(scattered_path(los, rng));
    }

    if (!ue || status == LinkStatus::Absent)
        return out;

    {
        const double d = checked_distance(scene.bs, *ue);
        auto los = los_path(d, lambda, bearing(scene.bs, *ue), settings);
        if (status == LinkStatus::Blocked)
            los.amplitude *= std::pow(10.0, -scene.penetration_loss_db / 20.0);
        out.bs_ue.push_back(los);
        // scatterers share the lobe of the LOS path, so blockage attenuates them too
        for (int k = 1; k < settings.paths_bs_ue; ++k)
            out.bs_ue.push_back(scattered_path(los, rng));
    }
    {
        const double d = checked_distance(scene.ris, *ue);
        auto los = los_path(d, lambda, bearing(scene.ris, *ue), settings);
        out.ris_ue.push_back(los);
        for (int k = 1; k < settings.paths_ris_ue; ++k)
            out.ris_ue.push_back(scattered_path(los, rng));
    }
    return out;
}

std::pair<int, int> world_to_pixel(const Scene &scene, Point2 p, const ImageDims &dims)
{
    int col = static_cast<int>(std::floor(p.x / scene.width_m * dims.width));
    int row = static_cast<int>(std::floor(p.y / scene.depth_m * dims.height));
    col = std::clamp(col, 0, dims.width - 1);
    row = std::clamp(row, 0, dims.height - 1);
    return {row, col};
}

RenderedImage render_image(const Scene &scene, std::optional<Point2> ue, LinkStatus status, const ImageDims &dims)
{
    if (dims.height < 1 || dims.width < 1 || dims.channels < 3)
        throw std::invalid_argument("image needs positive dimensions and three channels");
    RenderedImage img{dims, std::vector<float>(dims.count(), 0.0f)};

    for (int r = 0; r < dims.height; ++r)
    {
        const double y = (r + 0.5) / dims.height * scene.depth_m;
        for (int c = 0; c < dims.width; ++c)
        {
            const Point2 centre{(c + 0.5) / dims.width * scene.width_m, y};
            for (const auto &b : scene.blockers)
                if (b.contains(centre))
                {
                    img.at(r, c, kBlockerChannel) = 1.0f;
                    break;
                }
        }
    }

    for (Point2 p : {scene.bs, scene.ris})
    {
        const auto [row, col] = world_to_pixel(scene, p, dims);
        draw_square(img, row, col, kMarkerRadius, kInfrastructureChannel);
    }

    if (ue && status == LinkStatus::Unblocked)
    {
        const auto [row, col] = world_to_pixel(scene, *ue, dims);
        draw_square(img, row, col, kUeMarkerRadius, kUeChannel);
    }
    return img;
}

Trajectory generate_trajectory(const Scene &scene, int num_steps, double speed_mps, double step_interval_s,
                               double absent_probability, Rng &rng, std::optional<Rect> region)
{
    if (num_steps < 1)
        throw std::invalid_argument("trajectory needs at least one step");
    if (!(absent_probability >= 0.0 && absent_probability <= 1.0))
        throw std::invalid_argument("absent probability must lie in [0, 1]");
    if (!(speed_mps >= 0.0) || !(step_interval_s >= 0.0))
        throw std::invalid_argument("speed and step interval must be non-negative");

    const Rect area = region.value_or(Rect{{scene.width_m / 2, scene.depth_m / 2}, scene.width_m / 2,
                                           scene.depth_m / 2});
    auto draw_point = [&] {
        const double x = uniform(rng, area.min_x(), area.max_x());
        const double y = uniform(rng, area.min_y(), area.max_y());
        return Point2{x, y};
    };

    Trajectory traj;
    traj.speed_mps = speed_mps;
    traj.step_interval_s = step_interval_s;
    traj.positions.reserve(static_cast<std::size_t>(num_steps));

    const double step = speed_mps * step_interval_s;
    Point2 pos = draw_point();
    Point2 waypoint = draw_point();
    for (int s = 0; s < num_steps; ++s)
    {
        if (s > 0)
        {
            const double remaining = distance(pos, waypoint);
            if (remaining <= step)
            {
                pos = waypoint;
                waypoint = draw_point();
            }
            else
            {
                const double f = step / remaining;
                pos = {pos.x + f * (waypoint.x - pos.x), pos.y + f * (waypoint.y - pos.y)};
            }
        }
        const bool absent = std::bernoulli_distribution(absent_probability)(rng);
        traj.positions.push_back(absent ? std::nullopt : std::optional<Point2>(pos));
    }
    return traj;
}

} // namespace risblock
