// SPDX-License-Identifier: Apache-2.0
//
// edgeflow - communication-efficient edge learning simulator
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

#pragma once

#include "edgeflow/channel.hpp"
#include "edgeflow/linalg.hpp"

#include <optional>
#include <span>
#include <vector>

namespace edgeflow::aircomp
{

inline constexpr double kDefaultSigmaMin = 1e-6;
inline constexpr double kDefaultConditionLimit = 1e6;

struct Precoder
{
    ComplexMatrix W; // M_t x N
    int device_id = 0;
};

struct ZeroForcing
{
    Precoder precoder;
    linalg::Subspace effective_u; // first N left singular vectors of H, equal to H W
};

struct AggregationBeamformer
{
    ComplexMatrix A; // M_r x N, orthonormal columns
    bool non_unique_warning = false;
};

enum class Mode
{
    raw,    // y = sum_k A^H U_k x_k + A^H n
    aligned // each device pre-inverts A^H U_k so the noise-free sum is exact
};

struct DeviceTransmission
{
    channel::MimoChannel channel;
    Precoder precoder;
    ComplexVector payload; // length N
};

struct TransmitOptions
{
    Mode mode = Mode::aligned;
    double noise_variance = 0.0;
    std::optional<double> power_cap; // devices above it are excluded
    double condition_limit = kDefaultConditionLimit;
};

struct AirCompResult
{
    ComplexVector y;
    ComplexVector target; // sum of payloads of contributing devices
    double mse = 0.0;     // |y - target|^2 / N
    std::vector<double> per_device_tx_power;
    std::vector<int> excluded_devices; // device ids left out of this round
    int contributors = 0;
};

/// W = V_N diag(1 / sigma_1..N) so that H W = U_N. Throws IllConditionedChannel
/// when sigma_N < sigma_min.
ZeroForcing zf_precoder(const channel::MimoChannel &channel, int n, double sigma_min = kDefaultSigmaMin);

/// Receive beamformer as the Grassmann centroid of the channels' effective subspaces.
AggregationBeamformer design_beamformer(std::span<const channel::MimoChannel> channels, int n,
                                        double sigma_min = kDefaultSigmaMin);

/// Haar-distributed tall unitary matrix, the uninformed baseline beamformer.
AggregationBeamformer random_beamformer(int m_r, int n, RngStream &rng);

AirCompResult transmit_round(const AggregationBeamformer &beamformer, std::span<const DeviceTransmission> devices,
                             const TransmitOptions &options, RngStream &rng);

/// Server-side averaging of the over-the-air sum.
ComplexVector aircomp_average(const AirCompResult &result, int k);

/// Pairs consecutive real coefficients into one complex symbol; odd tail padded with zero.
ComplexVector real_to_complex(std::span<const double> values);
RealVector complex_to_real(const ComplexVector &symbols, Eigen::Index length);

struct VectorAggregate
{
    RealVector mean;                      // estimate of the average of the device vectors
    double mean_mse = 0.0;                // per-symbol AirComp MSE averaged over symbols
    std::vector<double> device_tx_energy; // summed over all symbols
    std::vector<int> excluded_devices;    // union over symbols
};

/// Streams K real vectors through MIMO AirComp, N complex coefficients per
/// channel use, using one beamformer for the whole block (block fading).
VectorAggregate aircomp_mean(std::span<const RealVector> vectors, std::span<const channel::MimoChannel> channels,
                             int n, const TransmitOptions &options, RngStream &rng,
                             double sigma_min = kDefaultSigmaMin);

} // namespace edgeflow::aircomp
