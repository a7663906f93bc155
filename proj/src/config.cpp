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


#include "risblock/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

namespace risblock
{

ConfigError::ConfigError(const std::string &what, std::size_t line)
    : std::runtime_error(what), line_(line)
{
}

namespace
{

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s)
{
    std::vector<std::string_view> out;
    while (true)
    {
        const auto comma = s.find(',');
        out.push_back(trim(s.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

double to_double(std::string_view s)
{
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
        throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
    return v;
}

template <typename Int>
Int to_int(std::string_view s)
{
    Int v{};
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
        throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
    return v;
}

std::vector<double> to_doubles(std::string_view s, std::size_t count)
{
    const auto parts = split_list(s);
    if (parts.size() != count)
        throw std::invalid_argument("expected " + std::to_string(count) + " comma-separated numbers");
    std::vector<double> out;
    for (auto p : parts)
        out.push_back(to_double(p));
    return out;
}

// shortest text that reads back to the same double
std::string num(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Field
{
    const char *section;
    const char *key;
    std::function<void(ExperimentConfig &, std::string_view)> set;
    std::function<std::string(const ExperimentConfig &)> get;
};

#define RB_DOUBLE(sec, name, member)                                                                                   \
    Field{sec, name, [](ExperimentConfig &c, std::string_view v) { c.member = to_double(v); },                         \
          [](const ExperimentConfig &c) { return num(c.member); }}
#define RB_INT(sec, name, member, type)                                                                                \
    Field{sec, name, [](ExperimentConfig &c, std::string_view v) { c.member = to_int<type>(v); },                      \
          [](const ExperimentConfig &c) { return std::to_string(c.member); }}
#define RB_POINT(sec, name, member)                                                                                    \
    Field{sec, name,                                                                                                   \
          [](ExperimentConfig &c, std::string_view v) {                                                                \
              const auto p = to_doubles(v, 2);                                                                         \
              c.member = Point2{p[0], p[1]};                                                                           \
          },                                                                                                           \
          [](const ExperimentConfig &c) { return num(c.member.x) + ", " + num(c.member.y); }}

#define RB_RECT(sec, name, member)                                                                                     \
    Field{sec, name,                                                                                                   \
          [](ExperimentConfig &c, std::string_view v) {                                                                \
              const auto p = to_doubles(v, 4);                                                                         \
              c.member = Rect{{p[0], p[1]}, p[2], p[3]};                                                               \
          },                                                                                                           \
          [](const ExperimentConfig &c) {                                                                              \
              const auto &r = c.member;                                                                                \
              return num(r.center.x) + ", " + num(r.center.y) + ", " + num(r.half_width) + ", " + num(r.half_height);  \
          }}

const std::vector<Field> &fields()
{
    static const std::vector<Field> table = {
        RB_INT("general", "seed", seed, std::uint64_t),
        Field{"general", "dataset_dir",
              [](ExperimentConfig &c, std::string_view v) {
                  if (v.empty())
                      c.dataset_dir.reset();
                  else
                      c.dataset_dir = std::filesystem::path(std::string(v));
              },
              [](const ExperimentConfig &c) { return c.dataset_dir ? c.dataset_dir->string() : std::string(); }},

        RB_INT("dataset", "num_samples", dataset.num_samples, std::size_t),
        RB_INT("dataset", "threads", dataset.threads, unsigned),
        RB_INT("dataset", "ris_refinement_rounds", dataset.ris_refinement_rounds, int),

        RB_DOUBLE("scene", "width_m", dataset.scene.width_m),
        RB_DOUBLE("scene", "depth_m", dataset.scene.depth_m),
        RB_POINT("scene", "bs", dataset.scene.bs),
        RB_POINT("scene", "ris", dataset.scene.ris),
        RB_INT("scene", "min_blockers", dataset.scene.min_blockers, int),
        RB_INT("scene", "max_blockers", dataset.scene.max_blockers, int),
        RB_DOUBLE("scene", "min_blocker_half_extent_m", dataset.scene.min_blocker_half_extent_m),
        RB_DOUBLE("scene", "max_blocker_half_extent_m", dataset.scene.max_blocker_half_extent_m),
        RB_DOUBLE("scene", "penetration_loss_db", dataset.scene.penetration_loss_db),
        RB_RECT("scene", "blocker_region", dataset.scene.blocker_region),
        RB_RECT("scene", "ue_region", dataset.scene.ue_region),
        RB_DOUBLE("scene", "absent_probability", dataset.scene.absent_probability),
        RB_INT("scene", "trajectory_steps", dataset.scene.trajectory_steps, int),
        RB_DOUBLE("scene", "step_interval_s", dataset.scene.step_interval_s),

        RB_DOUBLE("channel", "carrier_frequency_hz", dataset.propagation.carrier_frequency_hz),
        RB_DOUBLE("channel", "ue_speed_mps", dataset.propagation.ue_speed_mps),
        RB_DOUBLE("channel", "snr_linear", dataset.propagation.snr_linear),
        RB_INT("channel", "num_bs_antennas", dataset.geometry.num_bs_antennas, int),
        RB_INT("channel", "num_ris_elements", dataset.geometry.num_ris_elements, int),
        RB_DOUBLE("channel", "element_spacing_wavelengths", dataset.geometry.element_spacing_wavelengths),
        RB_INT("channel", "paths_bs_ue", dataset.mpc.paths_bs_ue, int),
        RB_INT("channel", "paths_bs_ris", dataset.mpc.paths_bs_ris, int),
        RB_INT("channel", "paths_ris_ue", dataset.mpc.paths_ris_ue, int),
        RB_DOUBLE("channel", "sampling_time_s", dataset.mpc.sampling_time_s),
        RB_INT("channel", "cyclic_prefix_count", dataset.mpc.cyclic_prefix_count, int),

        RB_INT("image", "height", dataset.image.height, int),
        RB_INT("image", "width", dataset.image.width, int),
        RB_INT("image", "channels", dataset.image.channels, int),

        RB_INT("train", "batch_size", train.batch_size, std::size_t),
        RB_DOUBLE("train", "learning_rate", train.learning_rate),
        RB_DOUBLE("train", "weight_decay", train.weight_decay),
        Field{"train", "schedule_epochs",
              [](ExperimentConfig &c, std::string_view v) {
                  c.train.schedule_epochs.clear();
                  if (!v.empty())
                      for (auto p : split_list(v))
                          c.train.schedule_epochs.push_back(to_int<int>(p));
              },
              [](const ExperimentConfig &c) {
                  std::string s;
                  for (std::size_t i = 0; i < c.train.schedule_epochs.size(); ++i)
                      s += (i ? ", " : "") + std::to_string(c.train.schedule_epochs[i]);
                  return s;
              }},
        RB_DOUBLE("train", "lr_reduction_factor", train.lr_reduction_factor),
        RB_INT("train", "epochs", train.epochs, int),
        RB_DOUBLE("train", "train_fraction", train.train_fraction),
        RB_INT("train", "hidden_units", train.hidden_units, std::size_t),
    };
    return table;
}

#undef RB_DOUBLE
#undef RB_INT
#undef RB_POINT
#undef RB_RECT

void validate(const ExperimentConfig &cfg)
{
    try
    {
        cfg.resolved_dataset().validate();
        cfg.resolved_train().validate();
    }
    catch (const std::exception &e)
    {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (cfg.dataset.image.channels != 3)
        throw ConfigError("invalid configuration: image.channels must be 3");
    if (cfg.dataset.image.height % kPoolFactor != 0 || cfg.dataset.image.width % kPoolFactor != 0)
        throw ConfigError("invalid configuration: image height and width must be multiples of " +
                          std::to_string(kPoolFactor));
}

} // namespace

ExperimentConfig parse_config(std::string_view text, const std::string &source)
{
    ExperimentConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    auto fail = [&](const std::string &msg, const std::string &line) {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg + ": " + line, line_no);
    };
    while (std::getline(in, raw))
    {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                fail("malformed section header", raw);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            bool known = false;
            for (const auto &f : fields())
                known = known || section == f.section;
            if (!known)
                fail("unknown section", raw);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail("expected key = value", raw);
        if (section.empty())
            fail("key outside of any section", raw);
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        const Field *field = nullptr;
        for (const auto &f : fields())
            if (section == f.section && key == f.key)
                field = &f;
        if (!field)
            fail("unknown key '" + key + "' in section [" + section + "]", raw);
        if (!seen.insert(section + "." + key).second)
            fail("duplicate key", raw);
        try
        {
            field->set(cfg, value);
        }
        catch (const std::invalid_argument &e)
        {
            fail(e.what(), raw);
        }
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::string text;
    try
    {
        text = read_file(path);
    }
    catch (const std::exception &e)
    {
        throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    return parse_config(text, path.string());
}

void apply_seed_override(ExperimentConfig &cfg)
{
    const char *env = std::getenv("RISBLOCK_SEED");
    if (!env || !*env)
        return;
    try
    {
        cfg.seed = to_int<std::uint64_t>(trim(env));
    }
    catch (const std::invalid_argument &)
    {
        throw ConfigError(std::string("RISBLOCK_SEED is not an unsigned integer: ") + env);
    }
}

std::string config_text(const ExperimentConfig &cfg)
{
    std::string out;
    std::string section;
    for (const auto &f : fields())
    {
        if (section != f.section)
        {
            section = f.section;
            out += (out.empty() ? "[" : "\n[") + section + "]\n";
        }
        out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

} // namespace risblock
