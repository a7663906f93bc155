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

#ifndef RISBLOCK_CHANNEL_HPP
#define RISBLOCK_CHANNEL_HPP

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace risblock
{

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kTwoPi = 6.283185307179586;

struct PropagationConfig
{
    double carrier_frequency_hz = 28e9;
    double ue_speed_mps = 20.0;
    double snr_linear = 1e10;

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

struct ArrayGeometry
{
    int num_bs_antennas = 4;
    int num_ris_elements = 256;
    double element_spacing_wavelengths = 0.5;

    void validate() const;
};

// One resolvable propagation path. Angles are taken at the array that forms
// the steering vector of the link. For the BS-RIS link the arrival angles
// belong to the RIS and the departure angles to the BS array.
struct MultipathComponent
{
    cplx amplitude{0.0, 0.0};
    double delay_s = 0.0;
    double sampling_time_s = 1e-6;
    int cyclic_prefix_count = 1;
    double azimuth_rad = 0.0;
    double elevation_rad = 0.0;
    double departure_azimuth_rad = 0.0;
    double departure_elevation_rad = 0.0;

    void validate() const;
};

struct RisElement
{
    double amplitude = 0.0; // in [0, 1]
    double phase_rad = 0.0; // in [0, 2pi)
};

class RisConfig
{
  public:
    RisConfig() = default;
    explicit RisConfig(std::vector<RisElement> elements);

    // All elements with zero reflection amplitude.
    static RisConfig off(std::size_t num_elements);

    std::size_t size() const { return elements_.size(); }
    const RisElement &operator[](std::size_t i) const { return elements_[i]; }
    const std::vector<RisElement> &elements() const { return elements_; }

  private:
    std::vector<RisElement> elements_;
};

// Dense row-major complex matrix. Row vectors are 1xN matrices.
class ChannelMatrix
{
  public:
    ChannelMatrix() = default;
    ChannelMatrix(std::size_t rows, std::size_t cols);
    ChannelMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    cplx &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const cplx> values() const { return data_; }
    std::span<cplx> values() { return data_; }
    std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool all_finite() const;
    double squared_norm() const;

    friend bool operator==(const ChannelMatrix &, const ChannelMatrix &) = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

// Pulse-shaping function evaluated at (d * t_k - tau_k) / t_k, i.e. in units
// of the path sampling time.
using PulseShape = std::function<double(double)>;

// Normalized sinc, sin(pi x) / (pi x) with p(0) = 1.
double sinc_pulse(double x);
// Constant one; reduces the pulse factor to a plain sum over the prefix taps.
double unit_pulse(double x);

double doppler_spread(const PropagationConfig &cfg);

// Phi = 2 pi f tau - 2 pi f_s t cos(theta) - phi
double phase_term(double carrier_hz, double doppler_hz, double delay_s, double sampling_time_s,
                  double azimuth_rad, double elevation_rad);

// 1 x n uniform linear array response.
ChannelMatrix steering_vector(int n_elements, double azimuth_rad, double elevation_rad,
                              double spacing_wavelengths);

ChannelMatrix channel_bs_ue(std::span<const MultipathComponent> paths, const PropagationConfig &cfg,
                            const ArrayGeometry &geom, const PulseShape &pulse = sinc_pulse);

// Static link, evaluated without Doppler.
ChannelMatrix channel_bs_ris(std::span<const MultipathComponent> paths, const PropagationConfig &cfg,
                             const ArrayGeometry &geom, const PulseShape &pulse = sinc_pulse);

ChannelMatrix channel_ris_ue(std::span<const MultipathComponent> paths, const PropagationConfig &cfg,
                             const ArrayGeometry &geom, const PulseShape &pulse = sinc_pulse);

// R x R diagonal reflection matrix.
ChannelMatrix ris_matrix(const RisConfig &ris);

// H = h_B + h_u * Delta * h_R with a dense Delta.
ChannelMatrix effective_gain(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_ris_ue,
                             const ChannelMatrix &ris, const ChannelMatrix &h_bs_ris);

// Same product exploiting the diagonal structure of the RIS.
ChannelMatrix effective_gain(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_ris_ue,
                             const RisConfig &ris, const ChannelMatrix &h_bs_ris);

// Normalized conjugate of h_B, or of the strongest cascaded row of h_R when
// the direct link vanishes. Returns 1 x M.
ChannelMatrix default_combiner(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_bs_ris,
                               const ChannelMatrix &h_ris_ue);

// Unit-amplitude configuration that adds every cascaded term coherently with
// the direct term seen through the combiner.
RisConfig co_phase_ris(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_bs_ris,
                       const ChannelMatrix &h_ris_ue, const ChannelMatrix &combiner);

// Rounds that take the alternating search to a fixed point on small arrays.
inline constexpr int kCoPhaseSearchRounds = 50;

// Alternates co-phasing with maximum-ratio combining, starting from the
// default combiner, and keeps the best co-phased configuration. The result is
// co_phase_ris evaluated at one of the visited combiners.
RisConfig co_phase_ris_refined(const ChannelMatrix &h_bs_ue, const ChannelMatrix &h_bs_ris,
                               const ChannelMatrix &h_ris_ue, int rounds = 4);

// log2(1 + snr ||H||^2)
double data_rate(const ChannelMatrix &gain, double snr_linear);

} // namespace risblock

#endif
