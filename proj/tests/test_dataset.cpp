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


#include "oracles.hpp"
#include "risblock/dataset.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "json.hpp"

using namespace risblock;
namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string &name)
{
    const fs::path dir = fs::temp_directory_path() / ("risblock_test_" + name);
    fs::remove_all(dir);
    return dir;
}

DatasetConfig small_config(std::size_t n, std::uint64_t seed)
{
    DatasetConfig cfg;
    cfg.num_samples = n;
    cfg.seed = seed;
    cfg.threads = 1;
    return cfg;
}

bool same_samples(const std::vector<Sample> &a, const std::vector<Sample> &b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i].image == b[i].image) || a[i].direct_rate != b[i].direct_rate || a[i].ris_rate != b[i].ris_rate ||
            a[i].label != b[i].label || a[i].seed_used != b[i].seed_used || a[i].location_index != b[i].location_index)
            return false;
    return true;
}

// splitmix64 as published, written out independently
std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

TEST_CASE("sha256 known vectors")
{
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("seed mixing is an injective per-index map")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i)
        seen.insert(mix_seed(7, i));
    CHECK(seen.size() == 10000);
    CHECK(mix_seed(7, 3) != mix_seed(8, 3));
    CHECK(splitmix(0) == 0xE220A8397B1DCDAFull);
    // index i is the (i + 1)-th output of a splitmix64 stream started at seed
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const std::uint64_t seed = rng(), index = rng() % 100000;
        CHECK(mix_seed(seed, index) == splitmix(seed + 0x9E3779B97F4A7C15ull * index));
    }
}

TEST_CASE("dataset determinism across runs and thread counts")
{
    auto cfg = small_config(120, 99);
    const auto a = generate_dataset(cfg);
    const auto b = generate_dataset(cfg);
    cfg.threads = 3;
    const auto c = generate_dataset(cfg);
    cfg.threads = 7;
    const auto d = generate_dataset(cfg);
    CHECK(same_samples(a.samples, b.samples));
    CHECK(same_samples(a.samples, c.samples));
    CHECK(same_samples(a.samples, d.samples));
    CHECK(encode_images(a.samples) == encode_images(d.samples));
    CHECK(encode_features(a.samples) == encode_features(d.samples));

    // every sample is reproducible on its own
    const Sample s = generate_sample(cfg, 57);
    CHECK(s.ris_rate == a.samples[57].ris_rate);
    CHECK(s.image == a.samples[57].image);
    CHECK(s.seed_used == mix_seed(99, 57));

    // a different seed changes the data
    const auto e = generate_dataset(small_config(120, 100));
    CHECK_FALSE(same_samples(a.samples, e.samples));
}

TEST_CASE("sample invariants")
{
    const auto ds = generate_dataset(small_config(300, 5));
    for (const auto &s : ds.samples)
    {
        CHECK(s.direct_rate >= 0.0);
        CHECK(s.ris_rate >= 0.0);
        CHECK(s.image.values.size() == ds.config.image.count());
        CHECK(std::all_of(s.image.values.begin(), s.image.values.end(),
                          [](float v) { return v >= 0.0f && v <= 1.0f; }));
        CHECK(s.location_index >= 0);
        CHECK(s.location_index < ds.config.scene.trajectory_steps);
        CHECK(s.ue.has_value() == (s.label != LinkStatus::Absent));
        if (s.label == LinkStatus::Absent)
        {
            CHECK(s.direct_rate == 0.0);
            CHECK(s.ris_rate == 0.0);
        }
        else
        {
            // the co-phased RIS never hurts the link
            CHECK(s.ris_rate >= s.direct_rate);
        }
    }
}

TEST_CASE("labels follow the generating geometry")
{
    const auto cfg = small_config(200, 11);
    for (std::size_t i = 0; i < cfg.num_samples; ++i)
    {
        const Sample s = generate_sample(cfg, i);
        // replay the draw order of the generator
        Rng rng(s.seed_used);
        const Scene scene = random_scene(cfg.scene, rng);
        const auto traj = generate_trajectory(scene, cfg.scene.trajectory_steps, cfg.propagation.ue_speed_mps,
                                              cfg.scene.step_interval_s, cfg.scene.absent_probability, rng,
                                              cfg.scene.ue_region);
        const auto ue = traj.positions[static_cast<std::size_t>(s.location_index)];
        LinkStatus expected = LinkStatus::Absent;
        if (ue)
        {
            bool hit = false;
            for (const auto &b : scene.blockers)
                hit = hit ||
                      oracle::segment_meets_box(scene.bs.x, scene.bs.y, ue->x, ue->y, b.min_x(), b.min_y(), b.max_x(),
                                                b.max_y());
            expected = hit ? LinkStatus::Blocked : LinkStatus::Unblocked;
        }
        CHECK(s.label == expected);
    }
}

TEST_CASE("default dataset: class balance and feature consistency")
{
    DatasetConfig cfg;
    CHECK(cfg.num_samples == 5000);
    cfg.threads = 0;
    const auto ds = generate_dataset(cfg);
    REQUIRE(ds.samples.size() == 5000);

    std::array<double, 3> count{}, direct{}, ris{};
    for (const auto &s : ds.samples)
    {
        const auto k = static_cast<std::size_t>(class_index(s.label));
        count[k] += 1.0;
        direct[k] += s.direct_rate;
        ris[k] += s.ris_rate;
    }
    for (std::size_t k = 0; k < 3; ++k)
    {
        const double f = count[k] / 5000.0;
        CHECK(f >= 0.2);
        CHECK(f <= 0.5);
        direct[k] /= count[k];
        ris[k] /= count[k];
    }
    const std::size_t absent = 0, unblocked = 1, blocked = 2;
    CHECK(ris[blocked] > ris[absent]);
    CHECK(direct[unblocked] > direct[blocked]);
}

TEST_CASE("dataset files round trip and hash checks")
{
    const auto ds = generate_dataset(small_config(40, 3));
    const fs::path dir = scratch_dir("roundtrip");
    const auto files = write_dataset(ds, dir);
    CHECK(files.images_sha256 == sha256_hex(read_file(dir / "images.bin")));
    CHECK(files.features_sha256 == sha256_hex(read_file(dir / "features.csv")));

    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest.at("num_samples") == 40);
    CHECK(manifest.at("content_hash") == files.content_hash);
    CHECK(manifest.at("config").at("seed") == 3);
    const auto &counts = manifest.at("class_counts");
    CHECK(counts.at("absent").get<int>() + counts.at("unblocked").get<int>() + counts.at("blocked").get<int>() == 40);

    const auto back = load_dataset(dir);
    CHECK(same_samples(ds.samples, back.samples));
    CHECK(to_json(back.config) == to_json(ds.config));

    // same seed, separate directory: identical manifest bytes
    const fs::path again = scratch_dir("roundtrip_again");
    write_dataset(generate_dataset(small_config(40, 3)), again);
    CHECK(read_file(dir / "manifest.json") == read_file(again / "manifest.json"));

    SUBCASE("corrupted images are refused")
    {
        std::string bytes = read_file(dir / "images.bin");
        bytes[bytes.size() / 2] ^= 0x01;
        write_file(dir / "images.bin", bytes);
        CHECK_THROWS_AS(load_dataset(dir), DatasetError);
    }
    SUBCASE("corrupted features are refused")
    {
        std::string text = read_file(dir / "features.csv");
        text.back() = ' ';
        write_file(dir / "features.csv", text);
        CHECK_THROWS_AS(load_dataset(dir), DatasetError);
    }
    SUBCASE("missing manifest is refused")
    {
        fs::remove(dir / "manifest.json");
        CHECK_THROWS_AS(load_dataset(dir), DatasetError);
    }
    fs::remove_all(dir);
    fs::remove_all(again);
}

TEST_CASE("config json round trip and validation")
{
    DatasetConfig cfg;
    cfg.num_samples = 17;
    cfg.scene.max_blockers = 3;
    cfg.propagation.snr_linear = 123.5;
    CHECK(to_json(dataset_config_from_json(to_json(cfg))) == to_json(cfg));

    cfg = {};
    cfg.num_samples = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.scene.min_blockers = 5;
    cfg.scene.max_blockers = 2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.scene.absent_probability = 1.2;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.scene.ue_region = {{50.0, 20.0}, 5.0, 5.0};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
