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

#ifndef RISBLOCK_PIPELINE_HPP
#define RISBLOCK_PIPELINE_HPP

#include "risblock/dataset.hpp"
#include "risblock/learn.hpp"
#include "risblock/scene.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace risblock
{

// Which sensors the predictor may use.
enum class Scenario
{
    None,       // direct-link rate only
    CameraOnly, // image only
    RisOnly,    // RIS-assisted rate only
    Both,       // camera stage, then RIS-assisted rate
};

inline constexpr std::array<Scenario, 4> kAllScenarios = {Scenario::None, Scenario::CameraOnly, Scenario::RisOnly,
                                                          Scenario::Both};

std::string_view scenario_name(Scenario s);
// Accepts none|camera|ris|both.
Scenario parse_scenario(std::string_view name);

struct Split
{
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded shuffle, then floor(n * fraction) indices go to training.
Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T> &items, double train_fraction,
                                                        std::uint64_t seed)
{
    const Split s = split_indices(items.size(), train_fraction, seed);
    std::pair<std::vector<T>, std::vector<T>> out;
    out.first.reserve(s.train.size());
    out.second.reserve(s.test.size());
    for (std::size_t i : s.train)
        out.first.push_back(items[i]);
    for (std::size_t i : s.test)
        out.second.push_back(items[i]);
    return out;
}

inline constexpr int kPoolFactor = 4;

// Average-pools every channel by `factor` and flattens to H' x W' x C.
std::vector<double> image_features(const RenderedImage &image, int factor = kPoolFactor);

// Fixed camera-stage rule: any UE-channel pixel above 0.5.
bool camera_detects_ue(const RenderedImage &image);

using CameraStage = std::function<bool(const RenderedImage &)>;

struct ThresholdFit
{
    double threshold = 0.0;
    double train_accuracy = 0.0;
};

// Absent-vs-blocked accuracy of the rule "blocked iff ris_rate >= threshold"
// over the Absent and Blocked members of `samples`.
double threshold_accuracy(std::span<const Sample> samples, double threshold);

// Scans the midpoints of the sorted unique RIS-assisted rates of the Absent
// and Blocked samples (plus the lowest value) and keeps the first threshold
// of maximal training accuracy. Throws std::invalid_argument when either
// class is missing.
ThresholdFit calibrate_rate_threshold(std::span<const Sample> samples);

// Camera stage first; when it does not see the UE the RIS-assisted rate
// separates blocked from absent.
LinkStatus cascade_predict(const Sample &sample, const CameraStage &camera, double rate_threshold);

// Raw rate feed of a scenario (0 when the scenario has no rate input).
double scenario_rate(const Sample &s, Scenario scenario);
bool scenario_uses_image(Scenario scenario);

FeatureSet build_features(std::span<const Sample> samples, Scenario scenario, const RateStandardizer &rate);

struct ScenarioModel
{
    Scenario scenario = Scenario::None;
    ModelFile model;
    std::vector<HistoryEntry> history;
    std::optional<double> rate_threshold; // Both only
};

ScenarioModel train_scenario(std::span<const Sample> train_set, Scenario scenario, const TrainConfig &cfg);

LinkStatus predict(const ScenarioModel &model, const Sample &sample);

// Learned-model prediction, ignoring the cascade for Scenario::Both.
LinkStatus predict_with_network(const ScenarioModel &model, const Sample &sample);

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>; // [true][predicted]

struct EvalReport
{
    Scenario scenario = Scenario::None;
    double accuracy = 0.0;
    Confusion confusion{};
    std::vector<std::pair<std::size_t, double>> curve; // (iteration, accuracy)
    double wall_time_s = 0.0;
    std::size_t test_size = 0;
    double network_accuracy = 0.0;
    std::optional<double> rate_threshold;
};

// Throws std::invalid_argument on an empty test set.
EvalReport evaluate_scenario(std::span<const Sample> test_set, const ScenarioModel &model);

// Wall time is left out so reports are reproducible byte for byte.
nlohmann::json report_json(const EvalReport &r);
std::string confusion_csv(const EvalReport &r);
std::string curve_csv(const EvalReport &r);

// Training defaults for the from-scratch perceptron used by experiments. The
// step schedule, batch, decay and budget are the TrainConfig ones; only the
// base learning rate is larger.
TrainConfig experiment_train_defaults();

struct ExperimentConfig
{
    DatasetConfig dataset;
    TrainConfig train = experiment_train_defaults();
    std::uint64_t seed = 20260101;
    std::optional<std::filesystem::path> dataset_dir;

    // Seeds derived from the global seed.
    std::uint64_t dataset_seed() const { return mix_seed(seed, 1); }
    std::uint64_t split_seed() const { return mix_seed(seed, 2); }
    std::uint64_t train_seed() const { return mix_seed(seed, 3); }

    // Dataset and training configs with the derived seeds applied.
    DatasetConfig resolved_dataset() const;
    TrainConfig resolved_train() const;
};

struct ExperimentResult
{
    std::vector<EvalReport> reports; // in kAllScenarios order
    std::string dataset_hash;
    double total_wall_time_s = 0.0;
};

// Trains every scenario model on the train split of `ds` (concurrently when
// threads allow; results do not depend on it).
std::vector<ScenarioModel> train_all_scenarios(const std::vector<Sample> &train_set, const TrainConfig &cfg);

// Model file layout for a scenario model, with metadata for scenario id,
// split and threshold.
ModelFile to_model_file(const ScenarioModel &m, double train_fraction, std::uint64_t split_seed);
ScenarioModel from_model_file(ModelFile file, std::vector<HistoryEntry> history);
std::uint64_t split_seed_of(const ModelFile &file);
double train_fraction_of(const ModelFile &file);

// Writes report_<s>.json, curve_<s>.csv and confusion_<s>.csv.
void write_reports(const std::vector<EvalReport> &reports, const std::filesystem::path &out_dir);

// Generates or loads the dataset, splits it, trains and evaluates all four
// scenarios and writes reports, models and experiment_manifest.json.
ExperimentResult run_experiment(const ExperimentConfig &cfg, const std::filesystem::path &out_dir);

// Merged curve CSV (iteration + one column per scenario).
std::string merged_curves_csv(const std::vector<std::pair<Scenario, std::vector<std::pair<std::size_t, double>>>> &curves);
// Dependency-free SVG line chart, one <polyline> per series.
std::string curves_svg(const std::vector<std::pair<Scenario, std::vector<std::pair<std::size_t, double>>>> &curves);

} // namespace risblock

#endif
