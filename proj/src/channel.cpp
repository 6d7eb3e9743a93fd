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

#include "edgeflow/channel.hpp"

#include "edgeflow/errors.hpp"

#include <cmath>
#include <numbers>

namespace edgeflow
{

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id)))
{
}

RngStream RngStream::derive(std::uint64_t master_seed, std::uint64_t module_tag, std::uint64_t device_id,
                            std::uint64_t round)
{
    std::uint64_t id = splitmix64(module_tag);
    id = splitmix64(id ^ device_id);
    id = splitmix64(id ^ round);
    return RngStream(master_seed, id);
}

double RngStream::normal()
{
    return normal_(engine_);
}

double RngStream::uniform()
{
    return uniform_(engine_);
}

Complex RngStream::complex_normal()
{
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    return {re * inv_sqrt2, im * inv_sqrt2};
}

std::size_t RngStream::index(std::size_t n)
{
    if (n == 0)
        throw InvalidInput("index range must be non-empty");
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

namespace channel
{

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

MimoChannel sample_rayleigh_mimo(int m_r, int m_t, RngStream &rng, int device_id)
{
    if (m_r < 1 || m_t < 1)
        throw InvalidInput("MIMO channel dimensions must be positive");
    MimoChannel ch{ComplexMatrix(m_r, m_t), device_id};
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index j = 0; j < m_t; ++j)
        for (Eigen::Index i = 0; i < m_r; ++i)
            ch.H(i, j) = rng.complex_normal();
    return ch;
}

ScalarLink sample_scalar_link(double mean_snr_db, RngStream &rng, int device_id, Fading fading)
{
    const double mean = db_to_linear(mean_snr_db);
    if (fading == Fading::none)
        return {mean, device_id};
    double gain = 0.0;
    while (gain <= 0.0)
        gain = std::norm(rng.complex_normal());
    return {mean * gain, device_id};
}

ComplexVector awgn(const ComplexVector &signal, double noise_variance, RngStream &rng)
{
    if (!(noise_variance >= 0.0))
        throw InvalidInput("noise variance must be nonnegative");
    if (noise_variance == 0.0)
        return signal;
    const double sd = std::sqrt(noise_variance);
    ComplexVector out = signal;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out(i) += sd * rng.complex_normal();
    return out;
}

} // namespace channel
} // namespace edgeflow
