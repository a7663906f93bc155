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


#include "risblock/cli.hpp"
#include "risblock/config.hpp"
#include "risblock/dataset.hpp"
#include "risblock/learn.hpp"
#include "risblock/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace risblock
{

namespace fs = std::filesystem;

namespace
{

// Validation failures that map to exit code 2.
class UsageError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Options
{
    std::string config;
    std::string out;
    std::string dataset;
    std::string models;
    std::string scenario = "all";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::optional<unsigned> threads;
    std::uint64_t gradcheck_seed = 1;
};

ExperimentConfig resolve_config(const Options &o)
{
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    apply_seed_override(cfg);
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.n)
    {
        if (*o.n < 2)
            throw UsageError("--n must be at least 2");
        cfg.dataset.num_samples = *o.n;
    }
    if (o.threads)
        cfg.dataset.threads = *o.threads;
    return cfg;
}

std::vector<Scenario> selected_scenarios(const std::string &name)
{
    if (name == "all")
        return {kAllScenarios.begin(), kAllScenarios.end()};
    try
    {
        return {parse_scenario(name)};
    }
    catch (const std::invalid_argument &e)
    {
        throw UsageError(e.what());
    }
}

void require_dir(const std::string &path, const char *what)
{
    if (path.empty() || !fs::is_directory(path))
        throw std::runtime_error(std::string(what) + " directory not found: " + path);
}

int cmd_generate(const Options &o, std::ostream &log)
{
    const ExperimentConfig cfg = resolve_config(o);
    const DatasetConfig dcfg = cfg.resolved_dataset();
    log << "generating " << dcfg.num_samples << " samples (seed " << cfg.seed << ")\n";
    const Dataset ds = generate_dataset(dcfg);
    fs::create_directories(o.out);
    const DatasetFiles files = write_dataset(ds, o.out);
    log << "wrote " << o.out << " content hash " << files.content_hash << "\n";
    return kExitOk;
}

int cmd_train(const Options &o, std::ostream &log)
{
    const ExperimentConfig cfg = resolve_config(o);
    const auto scenarios = selected_scenarios(o.scenario);
    require_dir(o.dataset, "dataset");
    const Dataset ds = load_dataset(o.dataset);
    const TrainConfig tcfg = cfg.resolved_train();
    const auto [train_set, test_set] = split_dataset(ds.samples, tcfg.train_fraction, cfg.split_seed());
    fs::create_directories(o.out);
    for (Scenario s : scenarios)
    {
        const std::string name(scenario_name(s));
        log << "training " << name << " on " << train_set.size() << " samples\n";
        const ScenarioModel m = train_scenario(train_set, s, tcfg);
        save_model(fs::path(o.out) / ("model_" + name + ".bin"), to_model_file(m, tcfg.train_fraction, cfg.split_seed()));
        write_file(fs::path(o.out) / ("history_" + name + ".csv"), history_csv(m.history));
        if (!m.history.empty())
            log << name << ": final loss " << m.history.back().loss << "\n";
    }
    return kExitOk;
}

int cmd_eval(const Options &o, std::ostream &log)
{
    require_dir(o.dataset, "dataset");
    require_dir(o.models, "models");
    const Dataset ds = load_dataset(o.dataset);
    std::vector<EvalReport> reports;
    for (Scenario s : kAllScenarios)
    {
        const std::string name(scenario_name(s));
        const fs::path model_path = fs::path(o.models) / ("model_" + name + ".bin");
        const fs::path history_path = fs::path(o.models) / ("history_" + name + ".csv");
        if (!fs::exists(model_path) || !fs::exists(history_path))
            throw std::runtime_error("missing model or history for scenario " + name + " in " + o.models);
        ModelFile file = load_model(model_path);
        const auto split_seed = split_seed_of(file);
        const double fraction = train_fraction_of(file);
        ScenarioModel m = from_model_file(std::move(file), parse_history_csv(read_file(history_path)));
        if (m.scenario != s)
            throw std::runtime_error(model_path.string() + " holds a different scenario");
        const auto [train_set, test_set] = split_dataset(ds.samples, fraction, split_seed);
        reports.push_back(evaluate_scenario(test_set, m));
        log << name << ": accuracy " << reports.back().accuracy << " on " << test_set.size() << " samples\n";
    }
    write_reports(reports, o.out);
    return kExitOk;
}

int cmd_gradcheck(const Options &o, std::ostream &log)
{
    std::mt19937_64 rng(o.gradcheck_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, static_cast<int>(kNumClasses) - 1);
    constexpr std::size_t dim = 12, hidden = 8, count = 10;
    FeatureSet data;
    data.dim = dim;
    for (std::size_t i = 0; i < count; ++i)
    {
        std::vector<double> x(dim);
        for (auto &v : x)
            v = normal(rng);
        data.push_back(x, normal(rng), label(rng));
    }
    MlpParams p = init_params(dim, hidden, rng());
    for (Tensor *t : p.tensors())
        for (auto &v : t->values)
            v += 0.1 * normal(rng);
    const GradCheckReport r = grad_check(p, data, 1e-5, TrainConfig{}.weight_decay);
    log << "max relative error " << r.max_relative_error << "\n";
    if (!(r.max_relative_error <= 1e-4))
    {
        log << "gradient check FAILED\n";
        return kExitRuntime;
    }
    log << "gradient check passed\n";
    return kExitOk;
}

std::vector<std::pair<std::size_t, double>> parse_curve_csv(const std::string &text, const std::string &source)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (line.rfind("iteration,accuracy", 0) != 0)
        throw std::runtime_error(source + ": unexpected header");
    std::vector<std::pair<std::size_t, double>> pts;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(source + ": malformed row '" + line + "'");
        pts.emplace_back(std::stoull(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return pts;
}

int cmd_curves(const Options &o, std::ostream &log)
{
    require_dir(o.out, "report");
    std::vector<std::pair<Scenario, std::vector<std::pair<std::size_t, double>>>> curves;
    for (Scenario s : kAllScenarios)
    {
        const fs::path p = fs::path(o.out) / ("curve_" + std::string(scenario_name(s)) + ".csv");
        if (!fs::exists(p))
            throw std::runtime_error("missing " + p.string());
        curves.emplace_back(s, parse_curve_csv(read_file(p), p.string()));
    }
    write_file(fs::path(o.out) / "curves.csv", merged_curves_csv(curves));
    write_file(fs::path(o.out) / "curves.svg", curves_svg(curves));
    log << "wrote curves.csv and curves.svg to " << o.out << "\n";
    return kExitOk;
}

int cmd_experiment(const Options &o, std::ostream &log)
{
    ExperimentConfig cfg = resolve_config(o);
    if (!o.dataset.empty())
        cfg.dataset_dir = fs::path(o.dataset);
    const ExperimentResult r = run_experiment(cfg, o.out);
    for (const auto &rep : r.reports)
        log << scenario_name(rep.scenario) << ": accuracy " << rep.accuracy << "\n";
    log << "total wall time " << r.total_wall_time_s << " s\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &log)
{
    CLI::App app{"risblock: RIS-assisted blockage prediction workbench"};
    app.require_subcommand(1);
    Options o;

    auto *gen = app.add_subcommand("generate", "generate a synthetic dataset");
    gen->add_option("--config", o.config, "config file")->check(CLI::ExistingFile);
    gen->add_option("--out", o.out, "output directory")->required();
    gen->add_option("--seed", o.seed, "global seed");
    gen->add_option("--n", o.n, "number of samples");
    gen->add_option("--threads", o.threads, "worker threads (output does not depend on it)");

    auto *trn = app.add_subcommand("train", "train scenario models on a dataset");
    trn->add_option("--dataset", o.dataset, "dataset directory")->required();
    trn->add_option("--config", o.config, "config file")->check(CLI::ExistingFile);
    trn->add_option("--out", o.out, "output directory")->required();
    trn->add_option("--scenario", o.scenario, "none|camera|ris|both|all");
    trn->add_option("--seed", o.seed, "global seed");

    auto *ev = app.add_subcommand("eval", "evaluate trained models on the test split");
    ev->add_option("--dataset", o.dataset, "dataset directory")->required();
    ev->add_option("--models", o.models, "directory with model_<s>.bin and history_<s>.csv")->required();
    ev->add_option("--out", o.out, "output directory")->required();

    auto *gc = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gc->add_option("--seed", o.gradcheck_seed, "draw seed");

    auto *cv = app.add_subcommand("curves", "merge curve_<s>.csv files into curves.csv and curves.svg");
    cv->add_option("--out", o.out, "report directory")->required();

    auto *ex = app.add_subcommand("experiment", "generate, train and evaluate end to end");
    ex->add_option("--config", o.config, "config file")->check(CLI::ExistingFile);
    ex->add_option("--out", o.out, "output directory")->required();
    ex->add_option("--dataset", o.dataset, "reuse or create the dataset here");
    ex->add_option("--seed", o.seed, "global seed");
    ex->add_option("--n", o.n, "number of samples");
    ex->add_option("--threads", o.threads, "worker threads");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        log << app.help();
        return kExitOk;
    }
    catch (const CLI::ParseError &e)
    {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try
    {
        if (*gen)
            return cmd_generate(o, log);
        if (*trn)
            return cmd_train(o, log);
        if (*ev)
            return cmd_eval(o, log);
        if (*gc)
            return cmd_gradcheck(o, log);
        if (*cv)
            return cmd_curves(o, log);
        return cmd_experiment(o, log);
    }
    catch (const ConfigError &e)
    {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const UsageError &e)
    {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        log << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

} // namespace risblock
