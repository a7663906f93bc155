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

#ifndef RISBLOCK_DATASET_HPP
#define RISBLOCK_DATASET_HPP

#include "risblock/channel.hpp"
#include "risblock/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace risblock
{

// Statistics of the randomized scene instances.
struct SceneConfig
{
    double width_m = 40.0;
    double depth_m = 40.0;
    Point2 bs{1.0, 20.0};
    Point2 ris{1.0, 21.0};
    int min_blockers = 0;
    int max_blockers = 16;
    double min_blocker_half_extent_m = 0.5;
    double max_blocker_half_extent_m = 2.0;
    // blocker centres are drawn inside this rectangle
    Rect blocker_region{{9.0, 20.0}, 5.0, 18.0};
    double penetration_loss_db = 30.0;
    // UE walks inside this rectangle
    Rect ue_region{{27.0, 20.0}, 11.0, 18.0};
    double absent_probability = 1.0 / 3.0;
    int trajectory_steps = 10; // UE speed comes from the propagation config
    double step_interval_s = 0.1;

    void validate() const;
};

struct DatasetConfig
{
    SceneConfig scene;
    PropagationConfig propagation{28e9, 20.0, 2e8};
    ArrayGeometry geometry{4, 1024, 0.5};
    MpcSettings mpc;
    ImageDims image;
    std::size_t num_samples = 5000;
    std::uint64_t seed = 20260101;
    int ris_refinement_rounds = 4;
    unsigned threads = 0; // 0: hardware concurrency; never affects the output

    void validate() const;
};

struct Sample
{
    RenderedImage image;
    double direct_rate = 0.0;
    double ris_rate = 0.0;
    LinkStatus label = LinkStatus::Absent;
    int location_index = 0;
    std::uint64_t seed_used = 0;
    std::optional<Point2> ue;
};

struct Dataset
{
    DatasetConfig config;
    std::vector<Sample> samples;
};

class DatasetError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// splitmix64 finalizer over (seed, index).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

// Draws a scene instance: blockers never obstruct the BS-RIS link nor cover
// the BS or RIS.
Scene random_scene(const SceneConfig &cfg, Rng &rng);

Sample generate_sample(const DatasetConfig &cfg, std::size_t index);

// Output is independent of cfg.threads.
Dataset generate_dataset(const DatasetConfig &cfg);

nlohmann::json to_json(const DatasetConfig &cfg);
DatasetConfig dataset_config_from_json(const nlohmann::json &j);

struct DatasetFiles
{
    std::string images_sha256;
    std::string features_sha256;
    std::string content_hash;
};

// Writes manifest.json, images.bin and features.csv into dir.
DatasetFiles write_dataset(const Dataset &ds, const std::filesystem::path &dir);

// Reads a dataset back and verifies every hash recorded in its manifest.
// Throws DatasetError on missing files or hash mismatch.
Dataset load_dataset(const std::filesystem::path &dir);

std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view bytes);

// Serialized forms used by the dataset files.
std::string encode_images(const std::vector<Sample> &samples);
std::string encode_features(const std::vector<Sample> &samples);

} // namespace risblock

#endif
