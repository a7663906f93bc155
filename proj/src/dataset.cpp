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

#include "risblock/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

namespace risblock
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr const char *kManifestFormat = "risblock-dataset";
constexpr int kManifestVersion = 1;

double uniform(Rng &rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

json point_json(Point2 p)
{
    return json::array({p.x, p.y});
}

Point2 point_from(const json &j)
{
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json rect_json(const Rect &r)
{
    return {{"center", point_json(r.center)}, {"half_width", r.half_width}, {"half_height", r.half_height}};
}

Rect rect_from(const json &j)
{
    return {point_from(j.at("center")), j.at("half_width").get<double>(), j.at("half_height").get<double>()};
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_float_le(std::string &out, float v)
{
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

float read_float_le(const char *p)
{
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i)
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<float>(bits);
}

} // namespace

void SceneConfig::validate() const
{
    if (!(width_m > 0.0) || !(depth_m > 0.0))
        throw std::invalid_argument("scene width and depth must be positive");
    if (min_blockers < 0 || max_blockers < min_blockers)
        throw std::invalid_argument("blocker count range is invalid");
    if (!(min_blocker_half_extent_m > 0.0) || max_blocker_half_extent_m < min_blocker_half_extent_m)
        throw std::invalid_argument("blocker extent range is invalid");
    if (!(absent_probability >= 0.0 && absent_probability <= 1.0))
        throw std::invalid_argument("absent probability must lie in [0, 1]");
    if (trajectory_steps < 1)
        throw std::invalid_argument("trajectory needs at least one step");
    if (!(step_interval_s >= 0.0))
        throw std::invalid_argument("step interval must be non-negative");
    if (!(ue_region.half_width >= 0.0) || !(ue_region.half_height >= 0.0) || ue_region.min_x() < 0.0 ||
        ue_region.min_y() < 0.0 || ue_region.max_x() > width_m || ue_region.max_y() > depth_m)
        throw std::invalid_argument("UE region must lie inside the scene bounds");
    if (!(blocker_region.half_width >= 0.0) || !(blocker_region.half_height >= 0.0) || blocker_region.min_x() < 0.0 ||
        blocker_region.min_y() < 0.0 || blocker_region.max_x() > width_m || blocker_region.max_y() > depth_m)
        throw std::invalid_argument("blocker region must lie inside the scene bounds");
    Scene probe{width_m, depth_m, bs, ris, {}, penetration_loss_db};
    probe.validate();
    if (ue_region.contains(bs) || ue_region.contains(ris))
        throw std::invalid_argument("UE region must not contain the BS or the RIS");
}

void DatasetConfig::validate() const
{
    scene.validate();
    propagation.validate();
    geometry.validate();
    if (mpc.paths_bs_ue < 1 || mpc.paths_bs_ris < 1 || mpc.paths_ris_ue < 1)
        throw std::invalid_argument("every link needs at least one path");
    if (!(mpc.sampling_time_s > 0.0) || mpc.cyclic_prefix_count < 1)
        throw std::invalid_argument("sampling time and cyclic prefix count must be positive");
    if (image.height < 1 || image.width < 1 || image.channels != 3)
        throw std::invalid_argument("image must have positive size and 3 channels");
    if (num_samples < 1)
        throw std::invalid_argument("dataset needs at least one sample");
    if (ris_refinement_rounds < 0)
        throw std::invalid_argument("RIS refinement rounds must be non-negative");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Scene random_scene(const SceneConfig &cfg, Rng &rng)
{
    Scene scene;
    scene.width_m = cfg.width_m;
    scene.depth_m = cfg.depth_m;
    scene.bs = cfg.bs;
    scene.ris = cfg.ris;
    scene.penetration_loss_db = cfg.penetration_loss_db;

    const int count = std::uniform_int_distribution<int>(cfg.min_blockers, cfg.max_blockers)(rng);
    constexpr int kMaxAttempts = 64;
    for (int b = 0; b < count; ++b)
    {
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt)
        {
            const double hw = uniform(rng, cfg.min_blocker_half_extent_m, cfg.max_blocker_half_extent_m);
            const double hh = uniform(rng, cfg.min_blocker_half_extent_m, cfg.max_blocker_half_extent_m);
            const auto &area = cfg.blocker_region;
            const Rect r{{uniform(rng, area.min_x(), area.max_x()), uniform(rng, area.min_y(), area.max_y())}, hw, hh};
            const Rect one[] = {r};
            if (r.contains(scene.bs) || r.contains(scene.ris) || los_blocked(scene.bs, scene.ris, one))
                continue;
            scene.blockers.push_back(r);
            break;
        }
    }
    return scene;
}

Sample generate_sample(const DatasetConfig &cfg, std::size_t index)
{
    Sample s;
    s.seed_used = mix_seed(cfg.seed, index);
    Rng rng(s.seed_used);

    const Scene scene = random_scene(cfg.scene, rng);
    const Trajectory traj =
        generate_trajectory(scene, cfg.scene.trajectory_steps, cfg.propagation.ue_speed_mps, cfg.scene.step_interval_s,
                            cfg.scene.absent_probability, rng, cfg.scene.ue_region);
    s.location_index = std::uniform_int_distribution<int>(0, cfg.scene.trajectory_steps - 1)(rng);
    s.ue = traj.positions[static_cast<std::size_t>(s.location_index)];
    s.label = link_status(scene, s.ue);

    const PathSet paths = synthesize_mpcs(scene, s.ue, s.label, cfg.propagation, cfg.mpc, rng);
    const auto h_b = channel_bs_ue(paths.bs_ue, cfg.propagation, cfg.geometry);
    const auto h_r = channel_bs_ris(paths.bs_ris, cfg.propagation, cfg.geometry);
    const auto h_u = channel_ris_ue(paths.ris_ue, cfg.propagation, cfg.geometry);
    const RisConfig ris = co_phase_ris_refined(h_b, h_r, h_u, cfg.ris_refinement_rounds);

    s.direct_rate = data_rate(h_b, cfg.propagation.snr_linear);
    s.ris_rate = data_rate(effective_gain(h_b, h_u, ris, h_r), cfg.propagation.snr_linear);
    s.image = render_image(scene, s.ue, s.label, cfg.image);
    return s;
}

Dataset generate_dataset(const DatasetConfig &cfg)
{
    cfg.validate();
    Dataset ds{cfg, std::vector<Sample>(cfg.num_samples)};

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.num_samples));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < cfg.num_samples; ++i)
            ds.samples[i] = generate_sample(cfg, i);
        return ds;
    }

    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try
            {
                for (std::size_t i = t; i < cfg.num_samples; i += threads)
                    ds.samples[i] = generate_sample(cfg, i);
            }
            catch (...)
            {
                errors[t] = std::current_exception();
            }
        });
    for (auto &th : pool)
        th.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    return ds;
}

json to_json(const DatasetConfig &cfg)
{
    const auto &sc = cfg.scene;
    return {
        {"scene",
         {{"width_m", sc.width_m},
          {"depth_m", sc.depth_m},
          {"bs", point_json(sc.bs)},
          {"ris", point_json(sc.ris)},
          {"min_blockers", sc.min_blockers},
          {"max_blockers", sc.max_blockers},
          {"min_blocker_half_extent_m", sc.min_blocker_half_extent_m},
          {"max_blocker_half_extent_m", sc.max_blocker_half_extent_m},
          {"blocker_region", rect_json(sc.blocker_region)},
          {"penetration_loss_db", sc.penetration_loss_db},
          {"ue_region", rect_json(sc.ue_region)},
          {"absent_probability", sc.absent_probability},
          {"trajectory_steps", sc.trajectory_steps},
          {"step_interval_s", sc.step_interval_s}}},
        {"propagation",
         {{"carrier_frequency_hz", cfg.propagation.carrier_frequency_hz},
          {"ue_speed_mps", cfg.propagation.ue_speed_mps},
          {"snr_linear", cfg.propagation.snr_linear}}},
        {"geometry",
         {{"num_bs_antennas", cfg.geometry.num_bs_antennas},
          {"num_ris_elements", cfg.geometry.num_ris_elements},
          {"element_spacing_wavelengths", cfg.geometry.element_spacing_wavelengths}}},
        {"mpc",
         {{"paths_bs_ue", cfg.mpc.paths_bs_ue},
          {"paths_bs_ris", cfg.mpc.paths_bs_ris},
          {"paths_ris_ue", cfg.mpc.paths_ris_ue},
          {"sampling_time_s", cfg.mpc.sampling_time_s},
          {"cyclic_prefix_count", cfg.mpc.cyclic_prefix_count}}},
        {"image", {{"height", cfg.image.height}, {"width", cfg.image.width}, {"channels", cfg.image.channels}}},
        {"num_samples", cfg.num_samples},
        {"seed", cfg.seed},
        {"ris_refinement_rounds", cfg.ris_refinement_rounds},
    };
}

DatasetConfig dataset_config_from_json(const json &j)
{
    DatasetConfig cfg;
    const auto &sc = j.at("scene");
    cfg.scene.width_m = sc.at("width_m").get<double>();
    cfg.scene.depth_m = sc.at("depth_m").get<double>();
    cfg.scene.bs = point_from(sc.at("bs"));
    cfg.scene.ris = point_from(sc.at("ris"));
    cfg.scene.min_blockers = sc.at("min_blockers").get<int>();
    cfg.scene.max_blockers = sc.at("max_blockers").get<int>();
    cfg.scene.min_blocker_half_extent_m = sc.at("min_blocker_half_extent_m").get<double>();
    cfg.scene.max_blocker_half_extent_m = sc.at("max_blocker_half_extent_m").get<double>();
    cfg.scene.blocker_region = rect_from(sc.at("blocker_region"));
    cfg.scene.penetration_loss_db = sc.at("penetration_loss_db").get<double>();
    cfg.scene.ue_region = rect_from(sc.at("ue_region"));
    cfg.scene.absent_probability = sc.at("absent_probability").get<double>();
    cfg.scene.trajectory_steps = sc.at("trajectory_steps").get<int>();
    cfg.scene.step_interval_s = sc.at("step_interval_s").get<double>();

    const auto &pr = j.at("propagation");
    cfg.propagation.carrier_frequency_hz = pr.at("carrier_frequency_hz").get<double>();
    cfg.propagation.ue_speed_mps = pr.at("ue_speed_mps").get<double>();
    cfg.propagation.snr_linear = pr.at("snr_linear").get<double>();

    const auto &ge = j.at("geometry");
    cfg.geometry.num_bs_antennas = ge.at("num_bs_antennas").get<int>();
    cfg.geometry.num_ris_elements = ge.at("num_ris_elements").get<int>();
    cfg.geometry.element_spacing_wavelengths = ge.at("element_spacing_wavelengths").get<double>();

    const auto &mp = j.at("mpc");
    cfg.mpc.paths_bs_ue = mp.at("paths_bs_ue").get<int>();
    cfg.mpc.paths_bs_ris = mp.at("paths_bs_ris").get<int>();
    cfg.mpc.paths_ris_ue = mp.at("paths_ris_ue").get<int>();
    cfg.mpc.sampling_time_s = mp.at("sampling_time_s").get<double>();
    cfg.mpc.cyclic_prefix_count = mp.at("cyclic_prefix_count").get<int>();

    const auto &im = j.at("image");
    cfg.image = {im.at("height").get<int>(), im.at("width").get<int>(), im.at("channels").get<int>()};
    cfg.num_samples = j.at("num_samples").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.ris_refinement_rounds = j.at("ris_refinement_rounds").get<int>();
    return cfg;
}

std::string sha256_hex(std::string_view bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
    {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string read_file(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatasetError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const fs::path &path, std::string_view bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("short write to " + path.string());
}

std::string encode_images(const std::vector<Sample> &samples)
{
    std::string out;
    if (!samples.empty())
        out.reserve(samples.size() * samples.front().image.values.size() * 4);
    for (const auto &s : samples)
        for (float v : s.image.values)
            append_float_le(out, v);
    return out;
}

std::string encode_features(const std::vector<Sample> &samples)
{
    std::string out = "index,direct_rate,ris_rate,label\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const auto &s = samples[i];
        out += std::to_string(i) + "," + format_double(s.direct_rate) + "," + format_double(s.ris_rate) + "," +
               std::to_string(static_cast<int>(s.label)) + "\n";
    }
    return out;
}

DatasetFiles write_dataset(const Dataset &ds, const fs::path &dir)
{
    fs::create_directories(dir);
    const std::string images = encode_images(ds.samples);
    const std::string features = encode_features(ds.samples);

    DatasetFiles files;
    files.images_sha256 = sha256_hex(images);
    files.features_sha256 = sha256_hex(features);
    files.content_hash = sha256_hex(images + features);

    std::array<std::size_t, 3> counts{};
    json meta = json::array();
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
    {
        const auto &s = ds.samples[i];
        ++counts[static_cast<std::size_t>(class_index(s.label))];
        meta.push_back({{"index", i},
                        {"location_index", s.location_index},
                        {"seed", s.seed_used},
                        {"label", static_cast<int>(s.label)},
                        {"ue", s.ue ? point_json(*s.ue) : json(nullptr)}});
    }
    const double n = static_cast<double>(ds.samples.size());

    json manifest = {
        {"format", kManifestFormat},
        {"version", kManifestVersion},
        {"config", to_json(ds.config)},
        {"num_samples", ds.samples.size()},
        {"image",
         {{"height", ds.config.image.height},
          {"width", ds.config.image.width},
          {"channels", ds.config.image.channels},
          {"dtype", "float32-le"},
          {"layout", "NHWC"}}},
        {"class_counts", {{"absent", counts[0]}, {"unblocked", counts[1]}, {"blocked", counts[2]}}},
        {"class_frequencies", {{"absent", counts[0] / n}, {"unblocked", counts[1] / n}, {"blocked", counts[2] / n}}},
        {"images_sha256", files.images_sha256},
        {"features_sha256", files.features_sha256},
        {"content_hash", files.content_hash},
        {"samples", std::move(meta)},
    };

    write_file(dir / "images.bin", images);
    write_file(dir / "features.csv", features);
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return files;
}

Dataset load_dataset(const fs::path &dir)
{
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path))
        throw DatasetError("missing dataset manifest: " + manifest_path.string());

    json manifest;
    try
    {
        manifest = json::parse(read_file(manifest_path));
    }
    catch (const json::exception &e)
    {
        throw DatasetError("malformed manifest: " + std::string(e.what()));
    }
    if (manifest.value("format", "") != kManifestFormat)
        throw DatasetError("not a risblock dataset manifest");

    Dataset ds;
    ds.config = dataset_config_from_json(manifest.at("config"));
    const std::string images = read_file(dir / "images.bin");
    const std::string features = read_file(dir / "features.csv");

    if (sha256_hex(images) != manifest.at("images_sha256").get<std::string>())
        throw DatasetError("hash mismatch: images.bin does not match its manifest");
    if (sha256_hex(features) != manifest.at("features_sha256").get<std::string>())
        throw DatasetError("hash mismatch: features.csv does not match its manifest");
    if (sha256_hex(images + features) != manifest.at("content_hash").get<std::string>())
        throw DatasetError("hash mismatch: content hash does not match its manifest");

    const std::size_t n = manifest.at("num_samples").get<std::size_t>();
    const ImageDims dims = ds.config.image;
    const std::size_t per_image = dims.count();
    if (images.size() != n * per_image * 4)
        throw DatasetError("images.bin has an unexpected size");

    ds.samples.resize(n);
    std::istringstream lines(features);
    std::string line;
    std::getline(lines, line); // header
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!std::getline(lines, line))
            throw DatasetError("features.csv is truncated");
        std::size_t idx = 0;
        double direct = 0.0, ris = 0.0;
        int label = 0;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%d", &idx, &direct, &ris, &label) != 4 || idx != i)
            throw DatasetError("malformed features.csv row " + std::to_string(i + 1));
        auto &s = ds.samples[i];
        s.direct_rate = direct;
        s.ris_rate = ris;
        s.label = status_from_code(label);
        s.image.dims = dims;
        s.image.values.resize(per_image);
        const char *base = images.data() + i * per_image * 4;
        for (std::size_t k = 0; k < per_image; ++k)
            s.image.values[k] = read_float_le(base + 4 * k);

        const auto &meta = manifest.at("samples").at(i);
        s.location_index = meta.at("location_index").get<int>();
        s.seed_used = meta.at("seed").get<std::uint64_t>();
        if (!meta.at("ue").is_null())
            s.ue = point_from(meta.at("ue"));
    }
    return ds;
}

} // namespace risblock
