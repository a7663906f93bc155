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
#include "risblock/learn.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace risblock;

namespace
{

FeatureSet random_features(std::size_t n, std::size_t dim, std::mt19937_64 &rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, 2);
    FeatureSet data;
    data.dim = dim;
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (auto &v : x)
            v = normal(rng);
        data.push_back(x, normal(rng), label(rng));
    }
    return data;
}

// Initialized weights plus small nonzero biases so every tensor is exercised.
MlpParams random_params(std::size_t dim, std::size_t hidden, std::mt19937_64 &rng)
{
    MlpParams p = init_params(dim, hidden, rng());
    std::normal_distribution<double> normal(0.0, 0.1);
    for (auto &v : p.b1.values)
        v = normal(rng);
    for (auto &v : p.b2.values)
        v = normal(rng);
    return p;
}

std::vector<std::size_t> all_indices(const FeatureSet &d)
{
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

double max_abs(const Gradients &g)
{
    double m = 0.0;
    for (const Tensor *t : g.tensors())
        for (double v : t->values)
            m = std::max(m, std::abs(v));
    return m;
}

} // namespace

TEST_CASE("softmax examples")
{
    const auto u = softmax({0.0, 0.0, 0.0});
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(u[c] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const auto b = softmax({0.0, 0.0, std::log(2.0)});
    CHECK(b[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(b[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(b[2] == doctest::Approx(0.5).epsilon(1e-14));

    // large logits stay finite
    const auto big = softmax({1000.0, 0.0, -1000.0});
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(std::isfinite(big[2]));
}

TEST_CASE("softmax sums to one on random inputs")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 5.0);
    int bad = 0;
    for (int trial = 0; trial < 10000; ++trial)
    {
        const auto b = softmax({normal(rng), normal(rng), normal(rng)});
        const double s = b[0] + b[1] + b[2];
        bad += std::abs(s - 1.0) > 1e-9;
        for (std::size_t c = 0; c < 3; ++c)
            bad += !(b[c] > 0.0 && b[c] < 1.0);
    }
    CHECK(bad == 0);
}

TEST_CASE("softmax shift invariance at the argmax")
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const std::array<double, 3> z{normal(rng), normal(rng), normal(rng)};
        const double shift = normal(rng) * 10.0;
        const std::array<double, 3> zs{z[0] + shift, z[1] + shift, z[2] + shift};
        CHECK(argmax_index(softmax(z).values()) == argmax_index(softmax(zs).values()));
    }
}

TEST_CASE("cross entropy examples")
{
    CHECK(cross_entropy(softmax({0.0, 0.0, 0.0}), 1) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(std::abs(cross_entropy(softmax({0.0, 0.0, 0.0}), 0) - std::log(3.0)) <= 1e-12);
    ProbVector half;
    half.p = {0.5, 0.25, 0.25};
    CHECK(std::abs(cross_entropy(half, 0) - std::log(2.0)) <= 1e-15);
    ProbVector sure;
    sure.p = {0.0, 1.0, 0.0};
    CHECK(cross_entropy(sure, 1) == 0.0);
    // clamp keeps the loss finite
    CHECK(cross_entropy(sure, 0) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy(sure, 3), std::invalid_argument);
    CHECK_THROWS_AS(cross_entropy(sure, -1), std::invalid_argument);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal(0.0, 4.0);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const auto b = softmax({normal(rng), normal(rng), normal(rng)});
        CHECK(cross_entropy(b, static_cast<int>(trial % 3)) >= 0.0);
    }
}

TEST_CASE("argmax examples")
{
    CHECK(argmax_index(std::vector<double>{0.2, 0.5, 0.3}) == 1);
    CHECK(argmax_index(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) == 0);
    CHECK(argmax_index(std::vector<double>{0.1, 0.1, 0.8}) == 2);
    CHECK(argmax_index(std::vector<double>{0.1, 0.45, 0.45}) == 1);
    CHECK_THROWS_AS(argmax_index(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("forward pass")
{
    const MlpParams zero = MlpParams::zeros(5, 4);
    const std::vector<double> x{1.0, -2.0, 0.5, 3.0, 0.0};
    const auto b = forward(zero, x, 0.7);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(b[c] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto p = random_params(7, 5, rng);
        std::vector<double> xi(7);
        for (auto &v : xi)
            v = normal(rng);
        const double r = normal(rng);
        const auto got = forward(p, xi, r);
        const auto want = oracle::mlp_probs(p, xi, r);
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(std::abs(got[c] - want[c]) <= 1e-12);
        CHECK(std::abs(got[0] + got[1] + got[2] - 1.0) <= 1e-9);
    }

    CHECK_THROWS_AS(forward(zero, std::vector<double>{1.0, 2.0}, 0.0), std::invalid_argument);
}

TEST_CASE("init is seeded with fan-in scaling")
{
    const auto a = init_params(400, 64, 9);
    const auto b = init_params(400, 64, 9);
    CHECK(a == b);
    CHECK_FALSE(a == init_params(400, 64, 10));
    double mean = 0.0, sq = 0.0;
    for (double v : a.w1.values)
    {
        mean += v;
        sq += v * v;
    }
    const double n = static_cast<double>(a.w1.values.size());
    mean /= n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.005);
    CHECK(var == doctest::Approx(1.0 / 400.0).epsilon(0.05));
    for (double v : a.b1.values)
        CHECK(v == 0.0);
}

TEST_CASE("gradient matches central differences over 20 draws")
{
    std::mt19937_64 rng(5);
    for (int draw = 0; draw < 20; ++draw)
    {
        const auto data = random_features(8, 10, rng);
        const auto p = random_params(10, 6, rng);
        const auto r = grad_check(p, data, 1e-5, 2e-3);
        CHECK(r.max_relative_error <= 1e-4);
    }
}

TEST_CASE("gradient check detects a corrupted entry")
{
    std::mt19937_64 rng(6);
    const auto data = random_features(6, 8, rng);
    const auto p = random_params(8, 5, rng);
    auto g = backward(p, data, all_indices(data), 2e-3);
    CHECK(grad_check_against(p, g.grads, data, 1e-5, 2e-3).max_relative_error <= 1e-4);
    for (std::size_t which = 0; which < 4; ++which)
    {
        auto bad = g.grads;
        bad.tensors()[which]->values[0] += 1.0;
        const auto r = grad_check_against(p, bad, data, 1e-5, 2e-3);
        CHECK(r.max_relative_error > 1e-2);
        CHECK(r.per_tensor[which] > 1e-2);
    }
}

TEST_CASE("gradient check on an empty hidden layer")
{
    std::mt19937_64 rng(7);
    const auto data = random_features(4, 3, rng);
    const auto p = MlpParams::zeros(3, 0);
    CHECK(grad_check(p, data, 1e-5, 0.0).max_relative_error <= 1e-4);
    const auto empty_input = MlpParams::zeros(0, 0);
    FeatureSet none;
    none.dim = 0;
    none.push_back(std::vector<double>{}, 0.5, 1);
    CHECK(grad_check(empty_input, none, 1e-5, 0.0).per_tensor[0] == 0.0);
}

TEST_CASE("backward properties")
{
    std::mt19937_64 rng(8);
    const auto data = random_features(10, 6, rng);
    const auto p = random_params(6, 4, rng);

    SUBCASE("duplicated batch leaves the gradient unchanged")
    {
        auto idx = all_indices(data);
        const auto g1 = backward(p, data, idx, 2e-3);
        auto twice = idx;
        twice.insert(twice.end(), idx.begin(), idx.end());
        const auto g2 = backward(p, data, twice, 2e-3);
        const auto ta = g1.grads.tensors(), tb = g2.grads.tensors();
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t k = 0; k < ta[t]->values.size(); ++k)
                CHECK(std::abs(ta[t]->values[k] - tb[t]->values[k]) <= 1e-14 * (1.0 + std::abs(ta[t]->values[k])));
        CHECK(g1.mean_loss == doctest::Approx(g2.mean_loss).epsilon(1e-14));
    }
    SUBCASE("confident correct prediction has a vanishing gradient")
    {
        auto q = MlpParams::zeros(6, 4);
        q.b2.values = {0.0, 60.0, 0.0};
        FeatureSet one;
        one.dim = 6;
        one.push_back(data.input(0), data.rates[0], 1);
        const auto g = backward(q, one, std::vector<std::size_t>{0}, 0.0);
        CHECK(max_abs(g.grads) <= 1e-9);
        CHECK(g.correct == 1);
    }
    SUBCASE("weight decay adds wd * w to weights only")
    {
        const auto idx = all_indices(data);
        const auto g0 = backward(p, data, idx, 0.0);
        const auto g1 = backward(p, data, idx, 0.5);
        for (std::size_t k = 0; k < p.w1.values.size(); ++k)
            CHECK(g1.grads.w1.values[k] - g0.grads.w1.values[k] ==
                  doctest::Approx(0.5 * p.w1.values[k]).epsilon(1e-9));
        for (std::size_t k = 0; k < p.b1.values.size(); ++k)
            CHECK(g1.grads.b1.values[k] == g0.grads.b1.values[k]);
    }
    CHECK_THROWS_AS(backward(p, data, std::vector<std::size_t>{}, 0.0), std::invalid_argument);
}

TEST_CASE("learning rate schedule")
{
    const TrainConfig cfg;
    CHECK(lr_schedule(1, cfg) == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(lr_schedule(4, cfg) == doctest::Approx(1e-3).epsilon(1e-15));
    CHECK(lr_schedule(5, cfg) == doctest::Approx(2e-4).epsilon(1e-14));
    CHECK(lr_schedule(7, cfg) == doctest::Approx(2e-4).epsilon(1e-14));
    CHECK(lr_schedule(8, cfg) == doctest::Approx(4e-5).epsilon(1e-14));
    CHECK(lr_schedule(10, cfg) == doctest::Approx(4e-5).epsilon(1e-14));
    for (int e = 1; e < 50; ++e)
        CHECK(lr_schedule(e + 1, cfg) <= lr_schedule(e, cfg));
    CHECK_THROWS_AS(lr_schedule(0, cfg), std::invalid_argument);
}

TEST_CASE("sgd step")
{
    MlpParams p = MlpParams::zeros(1, 1);
    p.w1.values = {1.0};
    Gradients g = MlpParams::zeros(1, 1);
    g.w1.values = {2.0};
    auto q = p;
    sgd_step(q, g, 0.1);
    CHECK(q.w1.values[0] == doctest::Approx(0.8).epsilon(1e-15));
    q = p;
    sgd_step(q, g, 0.0);
    CHECK(q == p);
    q = p;
    sgd_step(q, MlpParams::zeros(1, 1), 0.3);
    CHECK(q == p);
    CHECK_THROWS_AS(sgd_step(q, MlpParams::zeros(2, 1), 0.1), std::invalid_argument);
}

TEST_CASE("training is deterministic and reduces the loss")
{
    std::mt19937_64 rng(9);
    // a learnable problem: the label is the sign pattern of two inputs
    FeatureSet data;
    data.dim = 6;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 600; ++i)
    {
        std::vector<double> x(6);
        for (auto &v : x)
            v = normal(rng);
        const int label = x[0] > 0.5 ? 2 : (x[1] > 0.0 ? 1 : 0);
        data.push_back(x, normal(rng), label);
    }
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.hidden_units = 16;
    const auto a = train(data, cfg);
    const auto b = train(data, cfg);
    CHECK(a.params == b.params);
    REQUIRE(a.history.size() == 10 * 12);
    for (std::size_t i = 0; i < a.history.size(); ++i)
    {
        CHECK(a.history[i].iteration == i + 1);
        CHECK(a.history[i].loss == b.history[i].loss);
    }

    auto epoch_loss = [&](int epoch) {
        double s = 0.0;
        int n = 0;
        for (const auto &h : a.history)
            if (h.epoch == epoch)
            {
                s += h.loss;
                ++n;
            }
        return s / n;
    };
    CHECK(epoch_loss(10) < epoch_loss(1));
    CHECK(a.history.back().learning_rate == doctest::Approx(0.5 * 0.04));

    cfg.seed = 8;
    CHECK_FALSE(train(data, cfg).params == a.params);

    FeatureSet empty;
    empty.dim = 6;
    CHECK_THROWS_AS(train(empty, cfg), std::invalid_argument);
}

TEST_CASE("single sample is memorized within the epoch budget")
{
    // one sample means one step per epoch; the step size is sized for that
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 10; ++trial)
    {
        auto data = random_features(1, 768, rng);
        if (trial % 2)
            std::fill(data.inputs.begin(), data.inputs.end(), 0.0); // rate feature only
        TrainConfig cfg;
        cfg.learning_rate = 10.0;
        cfg.weight_decay = 0.0;
        const auto result = train(data, cfg);
        CHECK(result.history.size() == 10);
        CHECK(result.history.front().loss > 0.1);
        const double loss = cross_entropy(forward(result.params, data.input(0), data.rates[0]), data.labels[0]);
        CHECK(loss < 1e-3);
    }
}

TEST_CASE("history csv round trip")
{
    std::vector<HistoryEntry> h{{1, 1, 1e-3, 1.0986, 0.34}, {2, 1, 1e-3, 0.5, 2.0 / 3.0}};
    const auto back = parse_history_csv(history_csv(h));
    REQUIRE(back.size() == 2);
    CHECK(back[1].iteration == 2);
    CHECK(back[1].train_accuracy == h[1].train_accuracy);
    CHECK(back[0].loss == h[0].loss);
}

TEST_CASE("model file round trip")
{
    std::mt19937_64 rng(11);
    ModelFile m{random_params(12, 5, rng), {0.25, 1.5}, {{"scenario", 2.0}, {"threshold", 0.125}}};
    const std::string bytes = encode_model(m);
    CHECK(bytes.substr(0, 8) == "RISBLKMD");
    const auto back = decode_model(bytes);
    CHECK(back.params == m.params);
    CHECK(back.rate.mean == 0.25);
    CHECK(back.rate.stddev == 1.5);
    CHECK(back.metadata == m.metadata);

    const auto path = std::filesystem::temp_directory_path() / "risblock_test_model.bin";
    save_model(path, m);
    CHECK(load_model(path).params == m.params);
    std::filesystem::remove(path);

    CHECK_THROWS(decode_model(bytes.substr(0, bytes.size() - 3)));
    std::string wrong = bytes;
    wrong[0] = 'X';
    CHECK_THROWS(decode_model(wrong));
}

TEST_CASE("rate standardizer")
{
    const std::vector<double> r{1.0, 2.0, 3.0, 4.0};
    const auto s = RateStandardizer::fit(r);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(1.25)));
    const std::vector<double> same{2.0, 2.0};
    const auto flat = RateStandardizer::fit(same);
    CHECK(std::isfinite(flat.apply(3.0)));
}
