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

#include "risblock/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risblock
{

namespace
{

double wrap_phase(double x)
{
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0)
        r += kTwoPi;
    if (r >= kTwoPi)
        r = 0.0;
    return r;
}

double safe_arg(cplx z)
{
    return (z == cplx(0.0, 0.0)) ? 0.0 : std::arg(z);
}

void require_shape(const ChannelMatrix &m, std::size_t rows, std::size_t cols, const char *name)
{
    if (m.rows() != rows || m.cols() != cols)
        throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                                    std::to_string(m.cols()));
}

// alpha_k exp(-j k/K Phi_k) sum_d p(d t_k - tau_k), k counted from 1.
cplx path_weight(const MultipathComponent &p, std::size_t k, std::size_t num_paths, double carrier_hz,
                 double doppler_hz, const PulseShape &pulse)
{
    p.validate();
    const double phi = phase_term(carrier_hz, doppler_hz, p.delay_s, p.sampling_time_s, p.azimuth_rad,
                                  p.elevation_rad);
    const double scale = static_cast<double>(k) / static_cast<double>(num_paths);
    double taps = 0.0;
    for (int d = 0; d < p.cyclic_prefix_count; ++d)
        taps += pulse((d * p.sampling_time_s - p.delay_s) / p.sampling_time_s);
    return p.amplitude * std::polar(1.0, -scale * phi) * taps;
}

ChannelMatrix row_channel(std::span<const MultipathComponent> paths, double carrier_hz, double doppler_hz,
                          int n_elements, double spacing, const PulseShape &pulse)
{
    ChannelMatrix h(1, static_cast<std::size_t>(n_elements));
    for (std::size_t k = 0; k < paths.size(); ++k)
    {
        const auto &p = paths[k];
        const cplx w = path_weight(p, k + 1, paths.size(), carrier_hz, doppler_hz, pulse);
        const auto a = steering_vector(n_elements, p.azimuth_rad, p.elevation_rad, spacing);
        for (int m = 0; m < n_elements; ++m)
            h(0, m) += w * a(0, m);
    }
    return h;
}

} // namespace

void PropagationConfig::validate() const
{
    if (!(carrier_frequency_hz > 0.0) || !std::isfinite(carrier_frequency_hz))
        throw std::invalid_argument("carrier frequency must be positive and finite");
    if (!(ue_speed_mps >= 0.0) || !(ue_speed_mps < kSpeedOfLight))
        throw std::invalid_argument("UE speed must lie in [0, c)");
    if (!(snr_linear >= 0.0) || !std::isfinite(snr_linear))
        throw std::invalid_argument("SNR must be non-negative and finite");
}

void ArrayGeometry::validate() const
{
    if (num_bs_antennas < 1)
        throw std::invalid_argument("number of BS antennas must be at least 1");
    if (num_ris_elements < 1)
        throw std::invalid_argument("number of RIS elements must be at least 1");
    if (!(element_spacing_wavelengths > 0.0))
        throw std::invalid_argument("element spacing must be positive");
}

void MultipathComponent::validate() const
{
    if (!(delay_s >= 0.0))
        throw std::invalid_argument("path delay must be non-negative");
    if (!(sampling_time_s > 0.0))
        throw std::invalid_argument("sampling time must be positive");
    if (cyclic_prefix_count < 1)
        throw std::invalid_argument("cyclic prefix count must be at least 1");
    if (!(azimuth_rad >= 0.0 && azimuth_rad < kTwoPi) ||
        !(departure_azimuth_rad >= 0.0 && departure_azimuth_rad < kTwoPi))
        throw std::invalid_argument("azimuth must lie in [0, 2pi)");
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (!(std::abs(elevation_rad) <= half_pi) || !(std::abs(departure_elevation_rad) <= half_pi))
        throw std::invalid_argument("elevation must lie in [-pi/2, pi/2]");
}

RisConfig::RisConfig(std::vector<RisElement> elements) : elements_(std::move(elements))
{
    for (const auto &e : elements_)
    {
        if (!(e.amplitude >= 0.0 && e.amplitude <= 1.0))
            throw std::invalid_argument("RIS reflection amplitude must lie in [0, 1]");
        if (!std::isfinite(e.phase_rad))
            throw std::invalid_argument("RIS phase shift must be finite");
    }
}

RisConfig RisConfig::off(std::size_t num_elements)
{
    return RisConfig(std::vector<RisElement>(num_elements));
}

ChannelMatrix::ChannelMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols)
{
}

ChannelMatrix::ChannelMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
    : rows_(rows), cols_(cols), data_(std::move(data))
{
    if (data_.size() != rows * cols)
        throw std::invalid_argument("channel matrix entry count does not match its shape");
}

bool ChannelMatrix::all_finite() const
{
    for (const auto &z : data_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            return false;
    return true;
}

double ChannelMatrix::squared_norm() const
{
    double s = 0.0;
    for (const auto &z : data_)
        s += std::norm(z);
    return s;
}

double sinc_pulse(double x)
{
    if (x == 0.0)
        return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

double unit_pulse(double)
{
    return 1.0;
}

double doppler_spread(const PropagationConfig &cfg)
{
    return cfg.carrier_frequency_hz * cfg.ue_speed_mps / kSpeedOfLight;
}

double phase_term(double carrier_hz, double doppler_hz, double delay_s, double sampling_time_s,
                  double azimuth_rad, double elevation_rad)
{
    return kTwoPi * carrier_hz * delay_s - kTwoPi * doppler_hz * sampling_time_s * std::cos(azimuth_rad) -
           elevation_rad;
}

ChannelMatrix steering_vector(int n_elements, double azimuth_rad, double elevation_rad, double spacing_wavelengths)
{
    if (n_elements < 1)
        throw std::invalid_argument("steering vector needs at least one element");
    ChannelMatrix a(1, static_cast<std::size_t>(n_elements));
    const double step = kTwoPi * spacing_wavelengths * std::sin(azimuth_rad) * std::cos(elevation_rad);
    for (int m = 0; m < n_elements; ++m)
        a(0, m) = std::polar(1.0, step * m);
    return a;
}

ChannelMatrix channel_bs_ue(std::span<const MultipathComponent> paths, const PropagationConfig &cfg,
                            const ArrayGeometry &geom, const PulseShape &pulse)
{
    geom.validate();
    return row_channel(paths, cfg.carrier_frequency_hz, doppler_spread(cfg), geom.num_bs_antennas,
                       geom.element_spacing_wavelengths, pulse);
}

ChannelMatrix channel_ris_ue(std::span<const MultipathComponent> paths, const PropagationConfig &cfg,
                             const ArrayGeometry &geom, const PulseShape &pulse)
{
    geom.validate();
    return row_channel(paths, cfg.carrier_frequency_hz, doppler_spread(cfg), geom.num_ris_elements,
                       geom.element_spacing_wavelengths, pulse);
}

ChannelMatrix channel_bs_ris(std::span<const MultipathComponent> paths, const PropagationConfig &cfg,
                             const ArrayGeometry &geom, const PulseShape &pulse)
{
    geom.validate();
    const auto n_ris = static_cast<std::size_t>(geom.num_ris_elements);
    const auto n_bs = static_cast<std::size_t>(geom.num_bs_antennas);
    ChannelMatrix h(n_ris, n_bs);
    for (std::size_t k = 0; k < paths.size(); ++k)
    {
        const auto &p = paths[k];
        const cplx w = path_weight(p, k + 1, paths.size(), cfg.carrier_frequency_hz, 0.0, pulse);
        const auto b = steering_vector(geom.num_ris_elements, p.azimuth_rad, p.elevation_rad,
                                       geom.element_spacing_wavelengths);
        const auto a = steering_vector(geom.num_bs_antennas, p.departure_azimuth_rad, p.departure_elevation_rad,
                                       geom.element_spacing_wavelengths);
        for (std::size_t i = 0; i < n_ris; ++i)
        {
            const cplx wb = w * b(0, i);
            for (std::size_t m = 0; m < n_bs; ++m)
                h(i, m) += wb * a(0, m);
        }
    }
    return h;
}

ChannelMatrix ris_matrix(const RisConfig &ris)
{
    ChannelMatrix d(ris.size(), ris.size());
    for (std::size_t i = 0; i < ris.size(); ++i)
        d(i, i) = std::polar(ris[i].amplitude, ris[i].phase_rad);
    return d;
}

ChannelMatrix effective_gain(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_ris_ue, const ChannelMatrix &ris,
                             const ChannelMatrix &h_bs_ris)
{
    const std::size_t m = h_bs_ue.cols();
    const std::size_t r = h_ris_ue.cols();
    require_shape(h_bs_ue, 1, m, "h_B");
    require_shape(h_ris_ue, 1, r, "h_u");
    require_shape(ris, r, r, "Delta");
    require_shape(h_bs_ris, r, m, "h_R");

    std::vector<cplx> left(r);
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < r; ++i)
            left[j] += h_ris_ue(0, i) * ris(i, j);

    ChannelMatrix out = h_bs_ue;
    for (std::size_t c = 0; c < m; ++c)
    {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < r; ++j)
            acc += left[j] * h_bs_ris(j, c);
        out(0, c) += acc;
    }
    return out;
}

ChannelMatrix effective_gain(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_ris_ue, const RisConfig &ris,
                             const ChannelMatrix &h_bs_ris)
{
    const std::size_t m = h_bs_ue.cols();
    const std::size_t r = h_ris_ue.cols();
    require_shape(h_bs_ue, 1, m, "h_B");
    require_shape(h_ris_ue, 1, r, "h_u");
    require_shape(h_bs_ris, r, m, "h_R");
    if (ris.size() != r)
        throw std::invalid_argument("RIS configuration length does not match h_u");

    ChannelMatrix out = h_bs_ue;
    for (std::size_t c = 0; c < m; ++c)
    {
        cplx acc(0.0, 0.0);
        for (std::size_t i = 0; i < r; ++i)
            acc += h_ris_ue(0, i) * std::polar(ris[i].amplitude, ris[i].phase_rad) * h_bs_ris(i, c);
        out(0, c) += acc;
    }
    return out;
}

ChannelMatrix default_combiner(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_bs_ris,
                               const ChannelMatrix &h_ris_ue)
{
    const std::size_t m = h_bs_ue.cols();
    require_shape(h_bs_ris, h_ris_ue.cols(), m, "h_R");

    ChannelMatrix w(1, m);
    auto normalized_conj = [&](std::span<const cplx> v) {
        double n2 = 0.0;
        for (const auto &z : v)
            n2 += std::norm(z);
        const double n = std::sqrt(n2);
        for (std::size_t c = 0; c < m; ++c)
            w(0, c) = std::conj(v[c]) / n;
    };

    if (h_bs_ue.squared_norm() > 0.0)
    {
        normalized_conj(h_bs_ue.values());
        return w;
    }

    std::size_t best = 0;
    double best_gain = 0.0;
    for (std::size_t i = 0; i < h_bs_ris.rows(); ++i)
    {
        double row2 = 0.0;
        for (const auto &z : h_bs_ris.row(i))
            row2 += std::norm(z);
        const double g = std::abs(h_ris_ue(0, i)) * std::sqrt(row2);
        if (g > best_gain)
        {
            best_gain = g;
            best = i;
        }
    }
    if (best_gain > 0.0)
        normalized_conj(h_bs_ris.row(best));
    else
        w(0, 0) = 1.0;
    return w;
}

RisConfig co_phase_ris(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_bs_ris, const ChannelMatrix &h_ris_ue,
                       const ChannelMatrix &combiner)
{
    const std::size_t m = h_bs_ue.cols();
    const std::size_t r = h_ris_ue.cols();
    require_shape(h_bs_ue, 1, m, "h_B");
    require_shape(h_ris_ue, 1, r, "h_u");
    require_shape(h_bs_ris, r, m, "h_R");
    require_shape(combiner, 1, m, "combiner");

    cplx direct(0.0, 0.0);
    for (std::size_t c = 0; c < m; ++c)
        direct += h_bs_ue(0, c) * combiner(0, c);

    std::vector<cplx> ris_side(r); // (h_R w)[i]
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t c = 0; c < m; ++c)
            ris_side[i] += h_bs_ris(i, c) * combiner(0, c);

    double reference = safe_arg(direct);
    if (std::abs(direct) < 1e-15)
        reference = r > 0 ? safe_arg(h_ris_ue(0, 0) * ris_side[0]) : 0.0;

    std::vector<RisElement> elements(r);
    for (std::size_t i = 0; i < r; ++i)
        elements[i] = {1.0, wrap_phase(reference - safe_arg(h_ris_ue(0, i)) - safe_arg(ris_side[i]))};
    return RisConfig(std::move(elements));
}

RisConfig co_phase_ris_refined(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_bs_ris,
                               const ChannelMatrix &h_ris_ue, int rounds)
{
    ChannelMatrix w = default_combiner(h_bs_ue, h_bs_ris, h_ris_ue);
    RisConfig best = co_phase_ris(h_bs_ue, h_bs_ris, h_ris_ue, w);
    double best_norm = effective_gain(h_bs_ue, h_ris_ue, best, h_bs_ris).squared_norm();
    RisConfig current = best;
    for (int round = 0; round < rounds; ++round)
    {
        const ChannelMatrix h = effective_gain(h_bs_ue, h_ris_ue, current, h_bs_ris);
        const double n2 = h.squared_norm();
        if (!(n2 > 0.0))
            break;
        const double n = std::sqrt(n2);
        for (std::size_t c = 0; c < w.cols(); ++c)
            w(0, c) = std::conj(h(0, c)) / n;
        current = co_phase_ris(h_bs_ue, h_bs_ris, h_ris_ue, w);
        const double next = effective_gain(h_bs_ue, h_ris_ue, current, h_bs_ris).squared_norm();
        if (next > best_norm)
        {
            best_norm = next;
            best = current;
        }
    }
    return best;
}

double data_rate(const ChannelMatrix &gain, double snr_linear)
{
    if (!(snr_linear >= 0.0))
        throw std::invalid_argument("SNR must be non-negative");
    return std::log2(1.0 + snr_linear * gain.squared_norm());
}

} // namespace risblock
