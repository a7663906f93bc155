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

#ifndef RISBLOCK_LEARN_HPP
#define RISBLOCK_LEARN_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace risblock
{

inline constexpr std::size_t kNumClasses = 3;

struct Tensor
{
    std::vector<std::size_t> shape;
    std::vector<double> values;

    static Tensor zeros(std::vector<std::size_t> shape);
    std::size_t size() const { return values.size(); }
    bool all_finite() const;

    friend bool operator==(const Tensor &, const Tensor &) = default;
};

// Two-layer perceptron. The hidden layer sees the image features; the rate
// feature is appended to the rectified hidden activations before the output
// layer.
//   w1: [input x hidden], b1: [hidden], w2: [(hidden + 1) x 3], b2: [3]
struct MlpParams
{
    Tensor w1;
    Tensor b1;
    Tensor w2;
    Tensor b2;

    std::size_t input_dim() const { return w1.shape.at(0); }
    std::size_t hidden_dim() const { return b1.shape.at(0); }

    static MlpParams zeros(std::size_t input_dim, std::size_t hidden_dim);
    void validate() const;

    std::array<Tensor *, 4> tensors() { return {&w1, &b1, &w2, &b2}; }
    std::array<const Tensor *, 4> tensors() const { return {&w1, &b1, &w2, &b2}; }

    friend bool operator==(const MlpParams &, const MlpParams &) = default;
};

// Gradient of the objective, congruent to the parameters.
using Gradients = MlpParams;

struct ProbVector
{
    std::array<double, kNumClasses> p{};

    double operator[](std::size_t i) const { return p[i]; }
    std::span<const double> values() const { return p; }
};

struct TrainConfig
{
    std::size_t batch_size = 50;
    double learning_rate = 1e-3;
    double weight_decay = 2e-3;
    std::vector<int> schedule_epochs{5, 8};
    double lr_reduction_factor = 0.2;
    int epochs = 10;
    double train_fraction = 0.7;
    std::size_t hidden_units = 64;
    std::uint64_t seed = 7;

    void validate() const;
};

// Row-major design matrix plus the scalar rate feature and class labels.
struct FeatureSet
{
    std::size_t dim = 0;
    std::vector<double> inputs;
    std::vector<double> rates;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    std::span<const double> input(std::size_t i) const { return {inputs.data() + i * dim, dim}; }
    void push_back(std::span<const double> x, double rate, int label);
};

// Seeded zero-mean normal init with std 1/sqrt(fan_in); biases start at zero.
MlpParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed);

std::array<double, kNumClasses> logits(const MlpParams &params, std::span<const double> x, double rate);
ProbVector softmax(const std::array<double, kNumClasses> &z);
ProbVector forward(const MlpParams &params, std::span<const double> x, double rate);

// -log(b[label]) with b clamped at 1e-12.
double cross_entropy(const ProbVector &b, int label);

// Index of the maximum; ties go to the lowest index.
std::size_t argmax_index(std::span<const double> values);

// Mean cross-entropy over `batch` plus 0.5 * weight_decay * ||W||^2 over the
// weight matrices (biases are not decayed).
double objective(const MlpParams &params, const FeatureSet &data, std::span<const std::size_t> batch,
                 double weight_decay);

struct BatchGradient
{
    Gradients grads;
    double mean_loss = 0.0; // cross-entropy only
    std::size_t correct = 0;
};

// Exact gradient of objective().
BatchGradient backward(const MlpParams &params, const FeatureSet &data, std::span<const std::size_t> batch,
                       double weight_decay);

// base * factor^(number of schedule epochs <= epoch), epochs counted from 1.
double lr_schedule(int epoch, const TrainConfig &cfg);

void sgd_step(MlpParams &params, const Gradients &grads, double lr);

struct HistoryEntry
{
    std::size_t iteration = 0;
    int epoch = 0;
    double learning_rate = 0.0;
    double loss = 0.0;
    double train_accuracy = 0.0;
};

struct TrainResult
{
    MlpParams params;
    std::vector<HistoryEntry> history;
};

TrainResult train(const FeatureSet &data, const TrainConfig &cfg);

// Training history as CSV: iteration,epoch,lr,loss,train_accuracy
std::string history_csv(const std::vector<HistoryEntry> &history);
std::vector<HistoryEntry> parse_history_csv(const std::string &text);

struct GradCheckReport
{
    double max_relative_error = 0.0;
    std::array<double, 4> per_tensor{}; // w1, b1, w2, b2
};

// Central differences over every parameter against `analytic`.
GradCheckReport grad_check_against(const MlpParams &params, const Gradients &analytic, const FeatureSet &data,
                                   double h, double weight_decay);

GradCheckReport grad_check(const MlpParams &params, const FeatureSet &data, double h, double weight_decay);

struct RateStandardizer
{
    double mean = 0.0;
    double stddev = 1.0;

    static RateStandardizer fit(std::span<const double> rates);
    double apply(double rate) const { return (rate - mean) / stddev; }
};

struct ModelFile
{
    MlpParams params;
    RateStandardizer rate;
    std::map<std::string, double> metadata;
};

// Binary layout (little endian): "RISBLKMD", u32 version, u32 tensor count,
// per tensor u32 rank + u64 dims, then every tensor as f64 values, then
// f64 rate mean and stddev, then u32 metadata count with (u32 length, key,
// f64 value) entries.
std::string encode_model(const ModelFile &model);
ModelFile decode_model(std::string_view bytes);
void save_model(const std::filesystem::path &path, const ModelFile &model);
ModelFile load_model(const std::filesystem::path &path);

} // namespace risblock

#endif
