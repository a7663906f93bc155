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

#ifndef RISBLOCK_SCENE_HPP
#define RISBLOCK_SCENE_HPP

#include "risblock/channel.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace risblock
{

using Rng = std::mt19937_64;

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2 &, const Point2 &) = default;
};

double distance(Point2 a, Point2 b);

// Bearing of b seen from a, wrapped to [0, 2pi).
double bearing(Point2 from, Point2 to);

// Axis-aligned rectangle.
struct Rect
{
    Point2 center;
    double half_width = 0.0;
    double half_height = 0.0;

    double min_x() const { return center.x - half_width; }
    double max_x() const { return center.x + half_width; }
    double min_y() const { return center.y - half_height; }
    double max_y() const { return center.y + half_height; }
    bool contains(Point2 p) const;
};

struct Scene
{
    double width_m = 40.0;
    double depth_m = 40.0;
    Point2 bs;
    Point2 ris;
    std::vector<Rect> blockers;
    double penetration_loss_db = 30.0;

    bool inside(Point2 p) const;
    void validate() const;
};

struct Trajectory
{
    std::vector<std::optional<Point2>> positions; // nullopt: UE absent at that step
    double speed_mps = 0.0;
    double step_interval_s = 0.0;

    std::size_t size() const { return positions.size(); }
};

enum class LinkStatus : int
{
    Absent = -1,
    Unblocked = 0,
    Blocked = 1,
};

// Class index used by the classifiers: Absent 0, Unblocked 1, Blocked 2.
int class_index(LinkStatus s);
LinkStatus status_from_class(int index);
LinkStatus status_from_code(int code);
std::string_view to_string(LinkStatus s);

struct ImageDims
{
    int height = 64;
    int width = 64;
    int channels = 3;

    std::size_t count() const { return static_cast<std::size_t>(height) * width * channels; }
    friend bool operator==(const ImageDims &, const ImageDims &) = default;
};

// Row-major H x W x C raster with values in [0, 1].
struct RenderedImage
{
    ImageDims dims;
    std::vector<float> values;

    float at(int row, int col, int ch) const
    {
        return values[(static_cast<std::size_t>(row) * dims.width + col) * dims.channels + ch];
    }
    float &at(int row, int col, int ch)
    {
        return values[(static_cast<std::size_t>(row) * dims.width + col) * dims.channels + ch];
    }

    friend bool operator==(const RenderedImage &, const RenderedImage &) = default;
};

inline constexpr int kBlockerChannel = 0;
inline constexpr int kInfrastructureChannel = 1;
inline constexpr int kUeChannel = 2;

struct PathSet
{
    std::vector<MultipathComponent> bs_ue;
    std::vector<MultipathComponent> bs_ris;
    std::vector<MultipathComponent> ris_ue;
};

struct MpcSettings
{
    int paths_bs_ue = 5;
    int paths_bs_ris = 5;
    int paths_ris_ue = 5;
    double sampling_time_s = 1e-6;
    int cyclic_prefix_count = 2;
};

// True iff the open segment (a, b) meets any rectangle (slab clipping).
bool los_blocked(Point2 a, Point2 b, std::span<const Rect> blockers);

// Throws std::invalid_argument for a UE outside the scene bounds.
LinkStatus link_status(const Scene &scene, std::optional<Point2> ue);

// The first path of every list is the geometric line of sight. Absent UEs
// get no BS-UE or RIS-UE paths.
PathSet synthesize_mpcs(const Scene &scene, std::optional<Point2> ue, LinkStatus status,
                        const PropagationConfig &cfg, const MpcSettings &settings, Rng &rng);

// Top-down camera raster. The UE marker only appears when it is visible
// from the BS, so absent and blocked renders coincide.
RenderedImage render_image(const Scene &scene, std::optional<Point2> ue, LinkStatus status,
                           const ImageDims &dims = {});

// Pixel (row, col) holding a world point.
std::pair<int, int> world_to_pixel(const Scene &scene, Point2 p, const ImageDims &dims);

// Random-waypoint walk inside `region` (defaults to the scene bounds).
Trajectory generate_trajectory(const Scene &scene, int num_steps, double speed_mps, double step_interval_s,
                               double absent_probability, Rng &rng,
                               std::optional<Rect> region = std::nullopt);

} // namespace risblock

#endif
