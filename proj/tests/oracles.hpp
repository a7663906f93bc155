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


// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#ifndef RISBLOCK_TESTS_ORACLES_HPP
#define RISBLOCK_TESTS_ORACLES_HPP

#include "risblock/channel.hpp"
#include "risblock/learn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle
{

using cplx = std::complex<double>;

inline const double pi = std::acos(-1.0);
inline constexpr double c = 299792458.0;

inline double sinc(double x)
{
    if (x == 0.0)
        return 1.0;
    return std::sin(pi * x) / (pi * x);
}

// one path, one tap, one array element, spelled out term by term
inline cplx term(const risblock::MultipathComponent &p, int k, int K, double f, double fs, int d, double array_phase,
                 bool unit_pulse)
{
    const double big_phi = 2.0 * pi * f * p.delay_s - 2.0 * pi * fs * p.sampling_time_s * std::cos(p.azimuth_rad) -
                           p.elevation_rad;
    const double pulse = unit_pulse ? 1.0 : sinc((d * p.sampling_time_s - p.delay_s) / p.sampling_time_s);
    const cplx rot = std::exp(cplx(0.0, -(double(k) / double(K)) * big_phi));
    return p.amplitude * rot * pulse * std::exp(cplx(0.0, array_phase));
}

// Row channel (BS-UE: n = M, RIS-UE: n = R) as a naive triple loop.
inline std::vector<cplx> row_channel(const std::vector<risblock::MultipathComponent> &paths, double f, double fs,
                                     int n, double spacing, bool unit_pulse = false)
{
    std::vector<cplx> h(n, cplx(0.0, 0.0));
    const int K = static_cast<int>(paths.size());
    for (int k = 1; k <= K; ++k)
    {
        const auto &p = paths[k - 1];
        for (int d = 0; d < p.cyclic_prefix_count; ++d)
            for (int m = 0; m < n; ++m)
            {
                const double ap = 2.0 * pi * spacing * m * std::sin(p.azimuth_rad) * std::cos(p.elevation_rad);
                h[m] += term(p, k, K, f, fs, d, ap, unit_pulse);
            }
    }
    return h;
}

// BS-RIS channel, R x M row-major, static link.
inline std::vector<cplx> bs_ris_channel(const std::vector<risblock::MultipathComponent> &paths, double f, int R,
                                        int M, double spacing, bool unit_pulse = false)
{
    std::vector<cplx> h(static_cast<std::size_t>(R) * M, cplx(0.0, 0.0));
    const int K = static_cast<int>(paths.size());
    for (int k = 1; k <= K; ++k)
    {
        const auto &p = paths[k - 1];
        for (int d = 0; d < p.cyclic_prefix_count; ++d)
            for (int r = 0; r < R; ++r)
                for (int m = 0; m < M; ++m)
                {
                    const double ap =
                        2.0 * pi * spacing * r * std::sin(p.azimuth_rad) * std::cos(p.elevation_rad) +
                        2.0 * pi * spacing * m * std::sin(p.departure_azimuth_rad) *
                            std::cos(p.departure_elevation_rad);
                    h[static_cast<std::size_t>(r) * M + m] += term(p, k, K, f, 0.0, d, ap, unit_pulse);
                }
    }
    return h;
}

inline double rel_err(cplx a, cplx b, double floor = 1e-300)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline risblock::MultipathComponent random_path(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    risblock::MultipathComponent p;
    p.amplitude = std::polar(0.01 + u(rng), 2.0 * pi * u(rng));
    p.delay_s = 2e-7 * u(rng);
    p.sampling_time_s = 1e-7 + 1e-6 * u(rng);
    p.cyclic_prefix_count = 1 + static_cast<int>(u(rng) * 3.0);
    p.azimuth_rad = std::fmod(2.0 * pi * u(rng), 2.0 * pi);
    p.elevation_rad = (u(rng) - 0.5) * pi * 0.9;
    p.departure_azimuth_rad = std::fmod(2.0 * pi * u(rng), 2.0 * pi);
    p.departure_elevation_rad = (u(rng) - 0.5) * pi * 0.9;
    return p;
}

inline risblock::ChannelMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64 &rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<cplx> v(rows * cols);
    for (auto &z : v)
        z = cplx(n(rng), n(rng));
    return risblock::ChannelMatrix(rows, cols, std::move(v));
}

// H = hB + sum_i hu[i] a_i e^{j d_i} hR[i, :], with no library help.
inline std::vector<cplx> effective(const risblock::ChannelMatrix &hB, const risblock::ChannelMatrix &hR,
                                   const risblock::ChannelMatrix &hu, const std::vector<double> &phases,
                                   const std::vector<double> &amps)
{
    const std::size_t M = hB.cols(), R = hR.rows();
    std::vector<cplx> H(M);
    for (std::size_t m = 0; m < M; ++m)
    {
        H[m] = hB(0, m);
        for (std::size_t i = 0; i < R; ++i)
            H[m] += hu(0, i) * std::polar(amps[i], phases[i]) * hR(i, m);
    }
    return H;
}

inline double rate(const std::vector<cplx> &H, double snr)
{
    double n2 = 0.0;
    for (auto z : H)
        n2 += std::norm(z);
    return std::log2(1.0 + snr * n2);
}

// Segment vs axis-aligned box by the separating axis theorem: the two overlap
// unless the x axis, the y axis or the segment normal separates them.
inline bool segment_meets_box(double ax, double ay, double bx, double by, double min_x, double min_y, double max_x,
                              double max_y)
{
    if (std::max(ax, bx) < min_x || std::min(ax, bx) > max_x)
        return false;
    if (std::max(ay, by) < min_y || std::min(ay, by) > max_y)
        return false;
    const double nx = -(by - ay), ny = bx - ax;
    const double seg = nx * ax + ny * ay;
    const double corners[4] = {nx * min_x + ny * min_y, nx * min_x + ny * max_y, nx * max_x + ny * min_y,
                               nx * max_x + ny * max_y};
    const double lo = *std::min_element(corners, corners + 4);
    const double hi = *std::max_element(corners, corners + 4);
    return seg >= lo && seg <= hi;
}

// Class probabilities of the perceptron, evaluated with plain loops and an
// unshifted softmax. w1 is [input x hidden], w2 is [(hidden + 1) x 3].
inline std::array<double, 3> mlp_probs(const risblock::MlpParams &p, const std::vector<double> &x, double rate)
{
    const std::size_t in = p.w1.shape[0], hid = p.w1.shape[1];
    std::vector<double> a(hid + 1, 0.0);
    for (std::size_t j = 0; j < hid; ++j)
    {
        double s = p.b1.values[j];
        for (std::size_t i = 0; i < in; ++i)
            s += x[i] * p.w1.values[i * hid + j];
        a[j] = s > 0.0 ? s : 0.0;
    }
    a[hid] = rate;
    std::array<double, 3> e{};
    double total = 0.0;
    for (std::size_t c = 0; c < 3; ++c)
    {
        double z = p.b2.values[c];
        for (std::size_t j = 0; j <= hid; ++j)
            z += a[j] * p.w2.values[j * 3 + c];
        e[c] = std::exp(z);
        total += e[c];
    }
    for (auto &v : e)
        v /= total;
    return e;
}

} // namespace oracle

#endif
