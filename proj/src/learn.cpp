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

#include "risblock/learn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace risblock
{

namespace
{

constexpr double kProbFloor = 1e-12;
constexpr double kGradFloor = 1e-6;

struct Activations
{
    std::vector<double> pre;    // hidden pre-activation
    std::vector<double> hidden; // rectified
    std::array<double, kNumClasses> z{};
    ProbVector prob;
};

Activations run(const MlpParams &p, std::span<const double> x, double rate)
{
    const std::size_t in = p.input_dim();
    const std::size_t hid = p.hidden_dim();
    if (x.size() != in)
        throw std::invalid_argument("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                                    std::to_string(in));

    Activations a;
    a.pre.assign(p.b1.values.begin(), p.b1.values.end());
    for (std::size_t j = 0; j < in; ++j)
    {
        const double xj = x[j];
        if (xj == 0.0)
            continue;
        const double *row = p.w1.values.data() + j * hid;
        for (std::size_t h = 0; h < hid; ++h)
            a.pre[h] += xj * row[h];
    }
    a.hidden.resize(hid);
    for (std::size_t h = 0; h < hid; ++h)
        a.hidden[h] = a.pre[h] > 0.0 ? a.pre[h] : 0.0;

    auto &z = a.z;
    for (std::size_t c = 0; c < kNumClasses; ++c)
        z[c] = p.b2.values[c] + rate * p.w2.values[hid * kNumClasses + c];
    for (std::size_t h = 0; h < hid; ++h)
    {
        const double v = a.hidden[h];
        if (v == 0.0)
            continue;
        for (std::size_t c = 0; c < kNumClasses; ++c)
            z[c] += v * p.w2.values[h * kNumClasses + c];
    }
    a.prob = softmax(z);
    return a;
}

double squared_sum(const Tensor &t)
{
    double s = 0.0;
    for (double v : t.values)
        s += v * v;
    return s;
}

void put_u32(std::string &out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::string &out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_f64(std::string &out, double v)
{
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader
{
  public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint64_t u(int width)
    {
        if (pos_ + static_cast<std::size_t>(width) > bytes_.size())
            throw std::runtime_error("model file is truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    double f64() { return std::bit_cast<double>(u(8)); }
    std::string str(std::size_t n)
    {
        if (pos_ + n > bytes_.size())
            throw std::runtime_error("model file is truncated");
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

  private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

constexpr char kModelMagic[8] = {'R', 'I', 'S', 'B', 'L', 'K', 'M', 'D'};
constexpr std::uint32_t kModelVersion = 1;

} // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape)
{
    const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    return {std::move(shape), std::vector<double>(n, 0.0)};
}

bool Tensor::all_finite() const
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

MlpParams MlpParams::zeros(std::size_t input_dim, std::size_t hidden_dim)
{
    return {Tensor::zeros({input_dim, hidden_dim}), Tensor::zeros({hidden_dim}),
            Tensor::zeros({hidden_dim + 1, kNumClasses}), Tensor::zeros({kNumClasses})};
}

void MlpParams::validate() const
{
    if (w1.shape.size() != 2 || b1.shape.size() != 1 || w2.shape.size() != 2 || b2.shape.size() != 1)
        throw std::invalid_argument("parameter tensors have the wrong rank");
    const std::size_t hid = b1.shape[0];
    if (w1.shape[1] != hid || w2.shape[0] != hid + 1 || w2.shape[1] != kNumClasses || b2.shape[0] != kNumClasses)
        throw std::invalid_argument("parameter tensor shapes are inconsistent");
    for (const Tensor *t : tensors())
    {
        const std::size_t n =
            std::accumulate(t->shape.begin(), t->shape.end(), std::size_t{1}, std::multiplies<>());
        if (n != t->values.size())
            throw std::invalid_argument("tensor value count does not match its shape");
        if (!t->all_finite())
            throw std::invalid_argument("parameters contain non-finite values");
    }
}

void TrainConfig::validate() const
{
    if (batch_size < 1)
        throw std::invalid_argument("batch size must be at least 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("learning rate must be positive");
    if (!(weight_decay >= 0.0))
        throw std::invalid_argument("weight decay must be non-negative");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");
    if (epochs < 1)
        throw std::invalid_argument("training needs at least one epoch");
    if (!(lr_reduction_factor > 0.0))
        throw std::invalid_argument("learning rate reduction factor must be positive");
}

void FeatureSet::push_back(std::span<const double> x, double rate, int label)
{
    if (x.size() != dim)
        throw std::invalid_argument("feature vector dimension mismatch");
    inputs.insert(inputs.end(), x.begin(), x.end());
    rates.push_back(rate);
    labels.push_back(label);
}

MlpParams init_params(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    MlpParams p = MlpParams::zeros(input_dim, hidden_dim);
    auto fill = [&](Tensor &t, std::size_t fan_in) {
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1))));
        for (double &v : t.values)
            v = normal(rng);
    };
    fill(p.w1, input_dim);
    fill(p.w2, hidden_dim + 1);
    return p;
}

std::array<double, kNumClasses> logits(const MlpParams &params, std::span<const double> x, double rate)
{
    return run(params, x, rate).z;
}

ProbVector softmax(const std::array<double, kNumClasses> &z)
{
    const double zmax = *std::max_element(z.begin(), z.end());
    ProbVector b;
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c)
    {
        b.p[c] = std::exp(z[c] - zmax);
        sum += b.p[c];
    }
    for (double &v : b.p)
        v /= sum;
    return b;
}

ProbVector forward(const MlpParams &params, std::span<const double> x, double rate)
{
    return run(params, x, rate).prob;
}

double cross_entropy(const ProbVector &b, int label)
{
    if (label < 0 || label >= static_cast<int>(kNumClasses))
        throw std::invalid_argument("label index out of range");
    return -std::log(std::max(b[static_cast<std::size_t>(label)], kProbFloor));
}

std::size_t argmax_index(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("argmax of an empty list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best])
            best = i;
    return best;
}

double objective(const MlpParams &params, const FeatureSet &data, std::span<const std::size_t> batch,
                 double weight_decay)
{
    double loss = 0.0;
    for (std::size_t i : batch)
        loss += cross_entropy(forward(params, data.input(i), data.rates[i]), data.labels[i]);
    loss /= static_cast<double>(batch.size());
    return loss + 0.5 * weight_decay * (squared_sum(params.w1) + squared_sum(params.w2));
}

BatchGradient backward(const MlpParams &params, const FeatureSet &data, std::span<const std::size_t> batch,
                       double weight_decay)
{
    if (batch.empty())
        throw std::invalid_argument("backward needs a non-empty batch");
    const std::size_t in = params.input_dim();
    const std::size_t hid = params.hidden_dim();
    BatchGradient out{MlpParams::zeros(in, hid)};
    auto &g = out.grads;
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    std::vector<double> dz1(hid);
    for (std::size_t i : batch)
    {
        const auto x = data.input(i);
        const double rate = data.rates[i];
        const int label = data.labels[i];
        const auto a = run(params, x, rate);
        out.mean_loss += cross_entropy(a.prob, label);
        if (argmax_index(a.prob.values()) == static_cast<std::size_t>(label))
            ++out.correct;

        std::array<double, kNumClasses> dl{};
        for (std::size_t c = 0; c < kNumClasses; ++c)
            dl[c] = (a.prob[c] - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_n;

        for (std::size_t c = 0; c < kNumClasses; ++c)
        {
            g.b2.values[c] += dl[c];
            g.w2.values[hid * kNumClasses + c] += rate * dl[c];
        }
        for (std::size_t h = 0; h < hid; ++h)
        {
            const double *w2row = params.w2.values.data() + h * kNumClasses;
            double back = 0.0;
            for (std::size_t c = 0; c < kNumClasses; ++c)
            {
                g.w2.values[h * kNumClasses + c] += a.hidden[h] * dl[c];
                back += w2row[c] * dl[c];
            }
            dz1[h] = a.pre[h] > 0.0 ? back : 0.0;
            g.b1.values[h] += dz1[h];
        }
        for (std::size_t j = 0; j < in; ++j)
        {
            const double xj = x[j];
            if (xj == 0.0)
                continue;
            double *row = g.w1.values.data() + j * hid;
            for (std::size_t h = 0; h < hid; ++h)
                row[h] += xj * dz1[h];
        }
    }
    out.mean_loss *= inv_n;

    if (weight_decay != 0.0)
    {
        for (std::size_t k = 0; k < g.w1.values.size(); ++k)
            g.w1.values[k] += weight_decay * params.w1.values[k];
        for (std::size_t k = 0; k < g.w2.values.size(); ++k)
            g.w2.values[k] += weight_decay * params.w2.values[k];
    }
    return out;
}

double lr_schedule(int epoch, const TrainConfig &cfg)
{
    if (epoch < 1)
        throw std::invalid_argument("epochs are counted from 1");
    double lr = cfg.learning_rate;
    for (int milestone : cfg.schedule_epochs)
        if (milestone <= epoch)
            lr *= cfg.lr_reduction_factor;
    return lr;
}

void sgd_step(MlpParams &params, const Gradients &grads, double lr)
{
    auto dst = params.tensors();
    const auto src = grads.tensors();
    for (std::size_t t = 0; t < dst.size(); ++t)
    {
        if (dst[t]->shape != src[t]->shape)
            throw std::invalid_argument("gradient shape does not match parameters");
        for (std::size_t k = 0; k < dst[t]->values.size(); ++k)
            dst[t]->values[k] -= lr * src[t]->values[k];
    }
}

TrainResult train(const FeatureSet &data, const TrainConfig &cfg)
{
    cfg.validate();
    if (data.size() == 0)
        throw std::invalid_argument("training set is empty");

    TrainResult result{init_params(data.dim, cfg.hidden_units, cfg.seed), {}};
    std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66Dull);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::size_t iteration = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch)
    {
        const double lr = lr_schedule(epoch, cfg);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size)
        {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const auto step = backward(result.params, data, batch, cfg.weight_decay);
            sgd_step(result.params, step.grads, lr);
            ++iteration;
            result.history.push_back({iteration, epoch, lr, step.mean_loss,
                                      static_cast<double>(step.correct) / static_cast<double>(batch.size())});
        }
    }
    return result;
}

std::string history_csv(const std::vector<HistoryEntry> &history)
{
    std::string out = "iteration,epoch,lr,loss,train_accuracy\n";
    char buf[160];
    for (const auto &h : history)
    {
        std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g,%.17g\n", h.iteration, h.epoch, h.learning_rate, h.loss,
                      h.train_accuracy);
        out += buf;
    }
    return out;
}

std::vector<HistoryEntry> parse_history_csv(const std::string &text)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::vector<HistoryEntry> out;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        HistoryEntry h;
        if (std::sscanf(line.c_str(), "%zu,%d,%lf,%lf,%lf", &h.iteration, &h.epoch, &h.learning_rate, &h.loss,
                        &h.train_accuracy) != 5)
            throw std::runtime_error("malformed history row: " + line);
        out.push_back(h);
    }
    return out;
}

GradCheckReport grad_check_against(const MlpParams &params, const Gradients &analytic, const FeatureSet &data,
                                   double h, double weight_decay)
{
    if (!(h > 0.0))
        throw std::invalid_argument("finite-difference step must be positive");
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    GradCheckReport report;
    MlpParams probe = params;
    auto probe_tensors = probe.tensors();
    const auto grad_tensors = analytic.tensors();
    for (std::size_t t = 0; t < probe_tensors.size(); ++t)
    {
        auto &values = probe_tensors[t]->values;
        double worst = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k)
        {
            const double saved = values[k];
            values[k] = saved + h;
            const double up = objective(probe, data, all, weight_decay);
            values[k] = saved - h;
            const double down = objective(probe, data, all, weight_decay);
            values[k] = saved;

            const double numeric = (up - down) / (2.0 * h);
            const double exact = grad_tensors[t]->values[k];
            const double denom = std::max({std::abs(numeric), std::abs(exact), kGradFloor});
            worst = std::max(worst, std::abs(numeric - exact) / denom);
        }
        report.per_tensor[t] = worst;
        report.max_relative_error = std::max(report.max_relative_error, worst);
    }
    return report;
}

GradCheckReport grad_check(const MlpParams &params, const FeatureSet &data, double h, double weight_decay)
{
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto g = backward(params, data, all, weight_decay);
    return grad_check_against(params, g.grads, data, h, weight_decay);
}

RateStandardizer RateStandardizer::fit(std::span<const double> rates)
{
    RateStandardizer s;
    if (rates.empty())
        return s;
    const double n = static_cast<double>(rates.size());
    s.mean = std::accumulate(rates.begin(), rates.end(), 0.0) / n;
    double var = 0.0;
    for (double r : rates)
        var += (r - s.mean) * (r - s.mean);
    var /= n;
    s.stddev = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

std::string encode_model(const ModelFile &model)
{
    model.params.validate();
    std::string out(kModelMagic, sizeof kModelMagic);
    put_u32(out, kModelVersion);
    const auto tensors = model.params.tensors();
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const Tensor *t : tensors)
    {
        put_u32(out, static_cast<std::uint32_t>(t->shape.size()));
        for (std::size_t d : t->shape)
            put_u64(out, d);
    }
    for (const Tensor *t : tensors)
        for (double v : t->values)
            put_f64(out, v);
    put_f64(out, model.rate.mean);
    put_f64(out, model.rate.stddev);
    put_u32(out, static_cast<std::uint32_t>(model.metadata.size()));
    for (const auto &[key, value] : model.metadata)
    {
        put_u32(out, static_cast<std::uint32_t>(key.size()));
        out += key;
        put_f64(out, value);
    }
    return out;
}

ModelFile decode_model(std::string_view bytes)
{
    Reader in(bytes);
    if (in.str(sizeof kModelMagic) != std::string(kModelMagic, sizeof kModelMagic))
        throw std::runtime_error("not a risblock model file");
    const auto version = in.u(4);
    if (version != kModelVersion)
        throw std::runtime_error("unsupported model file version " + std::to_string(version));
    if (in.u(4) != 4)
        throw std::runtime_error("model file must hold four tensors");

    ModelFile model;
    auto tensors = model.params.tensors();
    for (Tensor *t : tensors)
    {
        const auto rank = in.u(4);
        if (rank > 8)
            throw std::runtime_error("model tensor rank is implausible");
        t->shape.resize(rank);
        for (auto &d : t->shape)
            d = in.u(8);
    }
    for (Tensor *t : tensors)
    {
        const std::size_t n =
            std::accumulate(t->shape.begin(), t->shape.end(), std::size_t{1}, std::multiplies<>());
        if (n > bytes.size() / 8)
            throw std::runtime_error("model tensor shape exceeds file size");
        t->values.resize(n);
        for (double &v : t->values)
            v = in.f64();
    }
    model.rate.mean = in.f64();
    model.rate.stddev = in.f64();
    const auto entries = in.u(4);
    for (std::uint64_t e = 0; e < entries; ++e)
    {
        const auto len = in.u(4);
        std::string key = in.str(len);
        model.metadata[key] = in.f64();
    }
    if (!in.done())
        throw std::runtime_error("trailing bytes in model file");
    model.params.validate();
    return model;
}

void save_model(const std::filesystem::path &path, const ModelFile &model)
{
    const std::string bytes = encode_model(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ModelFile load_model(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open model " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_model(ss.str());
}

} // namespace risblock
