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

#include "risblock/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace risblock
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json train_config_json(const TrainConfig &c)
{
    return {{"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"weight_decay", c.weight_decay},
            {"schedule_epochs", c.schedule_epochs},
            {"lr_reduction_factor", c.lr_reduction_factor},
            {"epochs", c.epochs},
            {"train_fraction", c.train_fraction},
            {"hidden_units", c.hidden_units},
            {"seed", c.seed}};
}

} // namespace

std::string_view scenario_name(Scenario s)
{
    switch (s)
    {
    case Scenario::None:
        return "none";
    case Scenario::CameraOnly:
        return "camera";
    case Scenario::RisOnly:
        return "ris";
    case Scenario::Both:
        return "both";
    }
    return "unknown";
}

Scenario parse_scenario(std::string_view name)
{
    for (Scenario s : kAllScenarios)
        if (scenario_name(s) == name)
            return s;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "' (expected none|camera|ris|both)");
}

Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed)
{
    if (n < 2)
        throw std::invalid_argument("splitting needs at least two samples");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    Split s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return s;
}

std::vector<double> image_features(const RenderedImage &image, int factor)
{
    const auto &d = image.dims;
    if (factor < 1 || d.height % factor != 0 || d.width % factor != 0)
        throw std::invalid_argument("pooling factor must divide the image size");
    const int ph = d.height / factor;
    const int pw = d.width / factor;
    std::vector<double> out(static_cast<std::size_t>(ph) * pw * d.channels, 0.0);
    const double inv = 1.0 / (factor * factor);
    for (int r = 0; r < d.height; ++r)
        for (int c = 0; c < d.width; ++c)
            for (int ch = 0; ch < d.channels; ++ch)
            {
                const float v = image.at(r, c, ch);
                if (v != 0.0f)
                    out[(static_cast<std::size_t>(r / factor) * pw + c / factor) * d.channels + ch] += v * inv;
            }
    return out;
}

bool camera_detects_ue(const RenderedImage &image)
{
    const auto &d = image.dims;
    for (int r = 0; r < d.height; ++r)
        for (int c = 0; c < d.width; ++c)
            if (image.at(r, c, kUeChannel) > 0.5f)
                return true;
    return false;
}

double threshold_accuracy(std::span<const Sample> samples, double threshold)
{
    std::size_t total = 0, correct = 0;
    for (const auto &s : samples)
    {
        if (s.label == LinkStatus::Unblocked)
            continue;
        ++total;
        const bool says_blocked = s.ris_rate >= threshold;
        if (says_blocked == (s.label == LinkStatus::Blocked))
            ++correct;
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

ThresholdFit calibrate_rate_threshold(std::span<const Sample> samples)
{
    std::vector<std::pair<double, bool>> pts; // (rate, is_blocked)
    for (const auto &s : samples)
        if (s.label != LinkStatus::Unblocked)
            pts.emplace_back(s.ris_rate, s.label == LinkStatus::Blocked);
    const auto n_blocked = static_cast<std::size_t>(std::count_if(pts.begin(), pts.end(), [](auto &p) { return p.second; }));
    if (n_blocked == 0 || n_blocked == pts.size())
        throw std::invalid_argument("threshold calibration needs both absent and blocked samples");
    std::sort(pts.begin(), pts.end());
    const double n = static_cast<double>(pts.size());

    // threshold at the lowest value: everything predicted blocked
    ThresholdFit best{pts.front().first, static_cast<double>(n_blocked) / n};
    std::size_t absent_below = 0, blocked_below = 0;
    std::size_t i = 0;
    while (i < pts.size())
    {
        const double value = pts[i].first;
        while (i < pts.size() && pts[i].first == value)
        {
            (pts[i].second ? blocked_below : absent_below) += 1;
            ++i;
        }
        const double next = (i < pts.size()) ? pts[i].first : value + 1.0;
        const double threshold = i < pts.size() ? 0.5 * (value + next) : std::nextafter(value, INFINITY);
        const double acc = static_cast<double>(absent_below + (n_blocked - blocked_below)) / n;
        if (acc > best.train_accuracy)
            best = {threshold, acc};
    }
    return best;
}

LinkStatus cascade_predict(const Sample &sample, const CameraStage &camera, double rate_threshold)
{
    if (camera(sample.image))
        return LinkStatus::Unblocked;
    return sample.ris_rate >= rate_threshold ? LinkStatus::Blocked : LinkStatus::Absent;
}

double scenario_rate(const Sample &s, Scenario scenario)
{
    switch (scenario)
    {
    case Scenario::None:
        return s.direct_rate;
    case Scenario::CameraOnly:
        return 0.0;
    case Scenario::RisOnly:
    case Scenario::Both:
        return s.ris_rate;
    }
    return 0.0;
}

bool scenario_uses_image(Scenario scenario)
{
    return scenario == Scenario::CameraOnly || scenario == Scenario::Both;
}

FeatureSet build_features(std::span<const Sample> samples, Scenario scenario, const RateStandardizer &rate)
{
    FeatureSet fs;
    if (samples.empty())
        return fs;
    const auto &d = samples.front().image.dims;
    fs.dim = static_cast<std::size_t>(d.height / kPoolFactor) * (d.width / kPoolFactor) * d.channels;
    fs.inputs.reserve(fs.dim * samples.size());
    const std::vector<double> blank(fs.dim, 0.0);
    for (const auto &s : samples)
    {
        const double r = scenario == Scenario::CameraOnly ? 0.0 : rate.apply(scenario_rate(s, scenario));
        const int label = class_index(s.label);
        if (scenario_uses_image(scenario))
            fs.push_back(image_features(s.image), r, label);
        else
            fs.push_back(blank, r, label);
    }
    return fs;
}

ScenarioModel train_scenario(std::span<const Sample> train_set, Scenario scenario, const TrainConfig &cfg)
{
    if (train_set.empty())
        throw std::invalid_argument("training set is empty");
    ScenarioModel m;
    m.scenario = scenario;
    if (scenario != Scenario::CameraOnly)
    {
        std::vector<double> rates;
        rates.reserve(train_set.size());
        for (const auto &s : train_set)
            rates.push_back(scenario_rate(s, scenario));
        m.model.rate = RateStandardizer::fit(rates);
    }
    const FeatureSet fs = build_features(train_set, scenario, m.model.rate);
    auto result = train(fs, cfg);
    m.model.params = std::move(result.params);
    m.history = std::move(result.history);
    if (scenario == Scenario::Both)
        m.rate_threshold = calibrate_rate_threshold(train_set).threshold;
    return m;
}

LinkStatus predict_with_network(const ScenarioModel &model, const Sample &sample)
{
    const auto &p = model.model.params;
    const double r = model.scenario == Scenario::CameraOnly
                         ? 0.0
                         : model.model.rate.apply(scenario_rate(sample, model.scenario));
    ProbVector b;
    if (scenario_uses_image(model.scenario))
        b = forward(p, image_features(sample.image), r);
    else
        b = forward(p, std::vector<double>(p.input_dim(), 0.0), r);
    return status_from_class(static_cast<int>(argmax_index(b.values())));
}

LinkStatus predict(const ScenarioModel &model, const Sample &sample)
{
    if (model.scenario == Scenario::Both)
    {
        if (!model.rate_threshold)
            throw std::invalid_argument("cascade predictor has no calibrated rate threshold");
        return cascade_predict(sample, camera_detects_ue, *model.rate_threshold);
    }
    return predict_with_network(model, sample);
}

EvalReport evaluate_scenario(std::span<const Sample> test_set, const ScenarioModel &model)
{
    if (test_set.empty())
        throw std::invalid_argument("evaluation needs a non-empty test set");
    const auto start = Clock::now();
    EvalReport r;
    r.scenario = model.scenario;
    r.test_size = test_set.size();
    r.rate_threshold = model.rate_threshold;
    std::size_t correct = 0, net_correct = 0;
    for (const auto &s : test_set)
    {
        const auto truth = static_cast<std::size_t>(class_index(s.label));
        const auto pred = static_cast<std::size_t>(class_index(predict(model, s)));
        ++r.confusion[truth][pred];
        correct += (truth == pred);
        if (model.scenario == Scenario::Both)
            net_correct += (truth == static_cast<std::size_t>(class_index(predict_with_network(model, s))));
        else
            net_correct += (truth == pred);
    }
    const double n = static_cast<double>(test_set.size());
    r.accuracy = static_cast<double>(correct) / n;
    r.network_accuracy = static_cast<double>(net_correct) / n;
    for (const auto &h : model.history)
        r.curve.emplace_back(h.iteration, h.train_accuracy);
    r.wall_time_s = seconds_since(start);
    return r;
}

json report_json(const EvalReport &r)
{
    json confusion = json::array();
    for (const auto &row : r.confusion)
        confusion.push_back(row);
    json j = {{"scenario", scenario_name(r.scenario)},
              {"accuracy", r.accuracy},
              {"network_accuracy", r.network_accuracy},
              {"test_size", r.test_size},
              {"class_order", {"absent", "unblocked", "blocked"}},
              {"confusion", confusion},
              {"curve_points", r.curve.size()}};
    if (r.rate_threshold)
        j["rate_threshold"] = *r.rate_threshold;
    return j;
}

std::string confusion_csv(const EvalReport &r)
{
    static constexpr const char *names[] = {"absent", "unblocked", "blocked"};
    std::string out = "true\\predicted,absent,unblocked,blocked\n";
    for (std::size_t t = 0; t < kNumClasses; ++t)
    {
        out += names[t];
        for (std::size_t p = 0; p < kNumClasses; ++p)
            out += "," + std::to_string(r.confusion[t][p]);
        out += "\n";
    }
    return out;
}

std::string curve_csv(const EvalReport &r)
{
    std::string out = "iteration,accuracy\n";
    for (const auto &[it, acc] : r.curve)
        out += std::to_string(it) + "," + fmt_double(acc) + "\n";
    return out;
}

TrainConfig experiment_train_defaults()
{
    TrainConfig t;
    t.learning_rate = 0.5;
    return t;
}

DatasetConfig ExperimentConfig::resolved_dataset() const
{
    DatasetConfig d = dataset;
    d.seed = dataset_seed();
    return d;
}

TrainConfig ExperimentConfig::resolved_train() const
{
    TrainConfig t = train;
    t.seed = train_seed();
    return t;
}

std::vector<ScenarioModel> train_all_scenarios(const std::vector<Sample> &train_set, const TrainConfig &cfg)
{
    std::vector<ScenarioModel> models(kAllScenarios.size());
    std::vector<std::exception_ptr> errors(kAllScenarios.size());
    auto job = [&](std::size_t k) {
        try
        {
            models[k] = train_scenario(train_set, kAllScenarios[k], cfg);
        }
        catch (...)
        {
            errors[k] = std::current_exception();
        }
    };
    if (std::thread::hardware_concurrency() > 1)
    {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < kAllScenarios.size(); ++k)
            pool.emplace_back(job, k);
        for (auto &t : pool)
            t.join();
    }
    else
    {
        for (std::size_t k = 0; k < kAllScenarios.size(); ++k)
            job(k);
    }
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
    return models;
}

ModelFile to_model_file(const ScenarioModel &m, double train_fraction, std::uint64_t split_seed)
{
    ModelFile f = m.model;
    f.metadata["scenario"] = static_cast<double>(static_cast<int>(m.scenario));
    f.metadata["train_fraction"] = train_fraction;
    // u64 does not fit a double mantissa; store the halves
    f.metadata["split_seed_hi"] = static_cast<double>(split_seed >> 32);
    f.metadata["split_seed_lo"] = static_cast<double>(split_seed & 0xFFFFFFFFull);
    if (m.rate_threshold)
        f.metadata["rate_threshold"] = *m.rate_threshold;
    return f;
}

ScenarioModel from_model_file(ModelFile file, std::vector<HistoryEntry> history)
{
    ScenarioModel m;
    const auto it = file.metadata.find("scenario");
    if (it == file.metadata.end())
        throw std::runtime_error("model file does not record its scenario");
    const int code = static_cast<int>(it->second);
    if (code < 0 || code > 3)
        throw std::runtime_error("model file records an unknown scenario");
    m.scenario = kAllScenarios[static_cast<std::size_t>(code)];
    if (auto t = file.metadata.find("rate_threshold"); t != file.metadata.end())
        m.rate_threshold = t->second;
    m.model = std::move(file);
    m.history = std::move(history);
    return m;
}

std::uint64_t split_seed_of(const ModelFile &file)
{
    const auto hi = static_cast<std::uint64_t>(file.metadata.at("split_seed_hi"));
    const auto lo = static_cast<std::uint64_t>(file.metadata.at("split_seed_lo"));
    return (hi << 32) | lo;
}

double train_fraction_of(const ModelFile &file)
{
    return file.metadata.at("train_fraction");
}

void write_reports(const std::vector<EvalReport> &reports, const fs::path &out_dir)
{
    fs::create_directories(out_dir);
    for (const auto &r : reports)
    {
        const std::string name(scenario_name(r.scenario));
        write_file(out_dir / ("report_" + name + ".json"), report_json(r).dump(2) + "\n");
        write_file(out_dir / ("curve_" + name + ".csv"), curve_csv(r));
        write_file(out_dir / ("confusion_" + name + ".csv"), confusion_csv(r));
    }
}

ExperimentResult run_experiment(const ExperimentConfig &cfg, const fs::path &out_dir)
{
    const auto start = Clock::now();
    const DatasetConfig dcfg = cfg.resolved_dataset();
    const TrainConfig tcfg = cfg.resolved_train();
    dcfg.validate();
    tcfg.validate();

    Dataset ds;
    bool loaded = false;
    if (cfg.dataset_dir && fs::exists(*cfg.dataset_dir / "manifest.json"))
    {
        ds = load_dataset(*cfg.dataset_dir);
        json requested = to_json(dcfg);
        if (to_json(ds.config) != requested)
            throw DatasetError("dataset at " + cfg.dataset_dir->string() +
                               " was generated with a different configuration");
        loaded = true;
    }
    else
    {
        ds = generate_dataset(dcfg);
    }

    fs::create_directories(out_dir);
    const fs::path data_dir = cfg.dataset_dir.value_or(out_dir / "dataset");
    DatasetFiles files;
    if (loaded)
    {
        const std::string images = encode_images(ds.samples);
        const std::string features = encode_features(ds.samples);
        files = {sha256_hex(images), sha256_hex(features), sha256_hex(images + features)};
    }
    else
    {
        files = write_dataset(ds, data_dir);
    }

    auto [train_set, test_set] = split_dataset(ds.samples, tcfg.train_fraction, cfg.split_seed());
    const auto models = train_all_scenarios(train_set, tcfg);

    const fs::path model_dir = out_dir / "models";
    fs::create_directories(model_dir);
    ExperimentResult result;
    result.dataset_hash = files.content_hash;
    json model_hashes = json::object();
    json accuracies = json::object();
    for (const auto &m : models)
    {
        const std::string name(scenario_name(m.scenario));
        const std::string bytes = encode_model(to_model_file(m, tcfg.train_fraction, cfg.split_seed()));
        write_file(model_dir / ("model_" + name + ".bin"), bytes);
        write_file(model_dir / ("history_" + name + ".csv"), history_csv(m.history));
        model_hashes[name] = sha256_hex(bytes);
        result.reports.push_back(evaluate_scenario(test_set, m));
        accuracies[name] = result.reports.back().accuracy;
    }
    write_reports(result.reports, out_dir);

    json manifest = {{"seed", cfg.seed},
                     {"dataset_seed", dcfg.seed},
                     {"split_seed", cfg.split_seed()},
                     {"train_seed", tcfg.seed},
                     {"dataset_content_hash", files.content_hash},
                     {"dataset_dir", data_dir.string()},
                     {"train_size", train_set.size()},
                     {"test_size", test_set.size()},
                     {"dataset", to_json(dcfg)},
                     {"train", train_config_json(tcfg)},
                     {"model_sha256", model_hashes},
                     {"accuracy", accuracies}};
    write_file(out_dir / "experiment_manifest.json", manifest.dump(2) + "\n");

    result.total_wall_time_s = seconds_since(start);
    json timing = json::object();
    for (const auto &r : result.reports)
        timing[std::string(scenario_name(r.scenario))] = r.wall_time_s;
    timing["total"] = result.total_wall_time_s;
    write_file(out_dir / "timing.json", timing.dump(2) + "\n");
    return result;
}

std::string merged_curves_csv(
    const std::vector<std::pair<Scenario, std::vector<std::pair<std::size_t, double>>>> &curves)
{
    std::vector<std::size_t> iterations;
    for (const auto &[s, pts] : curves)
        for (const auto &p : pts)
            iterations.push_back(p.first);
    std::sort(iterations.begin(), iterations.end());
    iterations.erase(std::unique(iterations.begin(), iterations.end()), iterations.end());

    std::string out = "iteration";
    for (const auto &[s, pts] : curves)
        out += "," + std::string(scenario_name(s));
    out += "\n";
    for (std::size_t it : iterations)
    {
        out += std::to_string(it);
        for (const auto &[s, pts] : curves)
        {
            out += ",";
            auto found = std::find_if(pts.begin(), pts.end(), [it](const auto &p) { return p.first == it; });
            if (found != pts.end())
                out += fmt_double(found->second);
        }
        out += "\n";
    }
    return out;
}

std::string curves_svg(const std::vector<std::pair<Scenario, std::vector<std::pair<std::size_t, double>>>> &curves)
{
    constexpr double width = 720, height = 420, left = 60, right = 150, top = 30, bottom = 50;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    static constexpr const char *colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};

    std::size_t max_it = 1;
    for (const auto &[s, pts] : curves)
        for (const auto &p : pts)
            max_it = std::max(max_it, p.first);

    char buf[256];
    std::string svg;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n",
                  width, height, width, height);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<g stroke=\"black\" stroke-width=\"1\"><line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\"/>"
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\"/></g>\n",
                  left, top + plot_h, left + plot_w, top + plot_h, left, top, left, top + plot_h);
    svg += buf;
    for (int k = 0; k <= 4; ++k)
    {
        const double y = top + plot_h * (1.0 - k / 4.0);
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" text-anchor=\"end\">%.2f</text>\n", left - 6, y + 4,
                      k / 4.0);
        svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">iteration (max %zu)</text>\n",
                  left + plot_w / 2, height - 12, max_it);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"14\" y=\"%g\" font-size=\"12\" transform=\"rotate(-90 14 %g)\" "
                  "text-anchor=\"middle\">accuracy</text>\n",
                  top + plot_h / 2, top + plot_h / 2);
    svg += buf;

    for (std::size_t k = 0; k < curves.size(); ++k)
    {
        const auto &[s, pts] = curves[k];
        const char *color = colors[k % 4];
        svg += "<polyline class=\"series\" data-scenario=\"" + std::string(scenario_name(s)) +
               "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
        for (const auto &[it, acc] : pts)
        {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", left + plot_w * static_cast<double>(it) / max_it,
                          top + plot_h * (1.0 - std::clamp(acc, 0.0, 1.0)));
            svg += buf;
        }
        svg += "\"/>\n";
        const double ly = top + 16.0 * k + 10;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"2\"/>"
                      "<text x=\"%g\" y=\"%g\" font-size=\"12\">%s</text>\n",
                      left + plot_w + 12, ly, left + plot_w + 32, ly, color, left + plot_w + 38, ly + 4,
                      std::string(scenario_name(s)).c_str());
        svg += buf;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace risblock
