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

#include "edgeflow/aircomp.hpp"

#include "edgeflow/errors.hpp"

#include <algorithm>
#include <string>

namespace edgeflow::aircomp
{

ZeroForcing zf_precoder(const channel::MimoChannel &channel, int n, double sigma_min)
{
    const auto m_r = channel.H.rows();
    const auto m_t = channel.H.cols();
    if (n < 1 || n > std::min(m_r, m_t))
        throw DimensionMismatch("stream count " + std::to_string(n) + " infeasible for a " + std::to_string(m_r) +
                                "x" + std::to_string(m_t) + " channel");

    const linalg::SvdTriple f = linalg::svd(channel.H);
    if (f.singular_values(n - 1) < sigma_min)
        throw IllConditionedChannel("device " + std::to_string(channel.device_id) + ": singular value " +
                                        std::to_string(f.singular_values(n - 1)) + " below threshold",
                                    channel.device_id);

    const RealVector inv = f.singular_values.head(n).cwiseInverse();
    ComplexMatrix w = f.V.leftCols(n) * inv.cast<Complex>().asDiagonal();
    return ZeroForcing{Precoder{std::move(w), channel.device_id}, linalg::Subspace(f.U.leftCols(n))};
}

AggregationBeamformer design_beamformer(std::span<const channel::MimoChannel> channels, int n, double sigma_min)
{
    if (channels.empty())
        throw InvalidInput("design_beamformer needs at least one channel");
    std::vector<linalg::Subspace> subspaces;
    subspaces.reserve(channels.size());
    for (const auto &ch : channels)
        subspaces.push_back(zf_precoder(ch, n, sigma_min).effective_u);
    linalg::CentroidResult c = linalg::grassmann_centroid(subspaces, n);
    return AggregationBeamformer{c.centroid.basis(), c.non_unique};
}

AggregationBeamformer random_beamformer(int m_r, int n, RngStream &rng)
{
    if (n < 1 || n > m_r)
        throw DimensionMismatch("beamformer must be tall");
    ComplexMatrix g(m_r, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m_r; ++i)
            g(i, j) = rng.complex_normal();
    return AggregationBeamformer{linalg::Subspace::span_of(g).basis(), false};
}

AirCompResult transmit_round(const AggregationBeamformer &beamformer, std::span<const DeviceTransmission> devices,
                             const TransmitOptions &options, RngStream &rng)
{
    const ComplexMatrix &a = beamformer.A;
    const Eigen::Index m_r = a.rows();
    const Eigen::Index n = a.cols();
    if (!(options.noise_variance >= 0.0))
        throw InvalidInput("noise variance must be nonnegative");

    AirCompResult out;
    out.y = ComplexVector::Zero(n);
    out.target = ComplexVector::Zero(n);
    out.per_device_tx_power.assign(devices.size(), 0.0);

    for (std::size_t k = 0; k < devices.size(); ++k)
    {
        const DeviceTransmission &d = devices[k];
        if (d.channel.H.rows() != m_r || d.precoder.W.rows() != d.channel.H.cols() || d.precoder.W.cols() != n ||
            d.payload.size() != n)
            throw DimensionMismatch("device " + std::to_string(d.channel.device_id) +
                                    " transmission does not match beamformer dimensions");
        if (!linalg::all_finite(d.payload))
            throw InvalidInput("payload has non-finite entries");

        const ComplexMatrix effective = d.channel.H * d.precoder.W; // U_k
        ComplexVector symbol = d.payload;
        if (options.mode == Mode::aligned)
        {
            const ComplexMatrix gain = a.adjoint() * effective;
            Eigen::JacobiSVD<ComplexMatrix> s(gain);
            const double smax = s.singularValues()(0);
            const double smin = s.singularValues()(n - 1);
            if (!(smin > 0.0) || smax / smin > options.condition_limit)
            {
                out.excluded_devices.push_back(d.channel.device_id);
                continue;
            }
            symbol = gain.partialPivLu().solve(d.payload);
        }

        const ComplexVector tx = d.precoder.W * symbol;
        const double power = tx.squaredNorm();
        if (options.power_cap && power > *options.power_cap)
        {
            out.excluded_devices.push_back(d.channel.device_id);
            continue;
        }
        out.per_device_tx_power[k] = power;
        out.y.noalias() += a.adjoint() * (d.channel.H * tx);
        out.target += d.payload;
        ++out.contributors;
    }

    if (!devices.empty() && out.contributors == 0)
        throw AlignmentSingular("no device could take part in the AirComp round");

    if (options.noise_variance > 0.0)
    {
        const ComplexVector noise = channel::awgn(ComplexVector::Zero(m_r), options.noise_variance, rng);
        out.y.noalias() += a.adjoint() * noise;
    }
    out.mse = (out.y - out.target).squaredNorm() / static_cast<double>(n);
    return out;
}

ComplexVector aircomp_average(const AirCompResult &result, int k)
{
    if (k < 1)
        throw InvalidInput("average over a non-positive device count");
    return result.y / static_cast<double>(k);
}

ComplexVector real_to_complex(std::span<const double> values)
{
    const std::size_t count = (values.size() + 1) / 2;
    ComplexVector out(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i)
    {
        const double re = values[2 * i];
        const double im = 2 * i + 1 < values.size() ? values[2 * i + 1] : 0.0;
        out(static_cast<Eigen::Index>(i)) = Complex(re, im);
    }
    return out;
}

RealVector complex_to_real(const ComplexVector &symbols, Eigen::Index length)
{
    if (length > 2 * symbols.size())
        throw DimensionMismatch("not enough symbols to fill the requested length");
    RealVector out(length);
    for (Eigen::Index i = 0; i < length; ++i)
    {
        const Complex &c = symbols(i / 2);
        out(i) = (i % 2 == 0) ? c.real() : c.imag();
    }
    return out;
}

VectorAggregate aircomp_mean(std::span<const RealVector> vectors, std::span<const channel::MimoChannel> channels,
                             int n, const TransmitOptions &options, RngStream &rng, double sigma_min)
{
    if (vectors.empty() || vectors.size() != channels.size())
        throw InvalidInput("aircomp_mean needs one channel per device vector");
    const Eigen::Index dim = vectors.front().size();
    for (const auto &v : vectors)
        if (v.size() != dim)
            throw DimensionMismatch("device vectors differ in length");

    VectorAggregate out;
    out.device_tx_energy.assign(vectors.size(), 0.0);

    std::vector<std::size_t> active;
    std::vector<channel::MimoChannel> usable;
    std::vector<DeviceTransmission> links;
    for (std::size_t k = 0; k < channels.size(); ++k)
    {
        try
        {
            ZeroForcing zf = zf_precoder(channels[k], n, sigma_min);
            links.push_back(DeviceTransmission{channels[k], std::move(zf.precoder), ComplexVector::Zero(n)});
            usable.push_back(channels[k]);
            active.push_back(k);
        }
        catch (const IllConditionedChannel &e)
        {
            out.excluded_devices.push_back(e.device_id());
        }
    }
    if (links.empty())
        throw AlignmentSingular("every channel is ill-conditioned");

    const AggregationBeamformer bf = design_beamformer(usable, n, sigma_min);

    std::vector<ComplexVector> packed;
    packed.reserve(active.size());
    for (std::size_t k : active)
        packed.push_back(real_to_complex(std::span<const double>(vectors[k].data(), vectors[k].size())));
    const Eigen::Index n_symbols_total = packed.front().size();
    const Eigen::Index uses = (n_symbols_total + n - 1) / n;

    ComplexVector sum = ComplexVector::Zero(uses * n);
    double mse_total = 0.0;
    for (Eigen::Index u = 0; u < uses; ++u)
    {
        const Eigen::Index begin = u * n;
        const Eigen::Index len = std::min<Eigen::Index>(n, n_symbols_total - begin);
        for (std::size_t i = 0; i < links.size(); ++i)
        {
            links[i].payload.setZero();
            links[i].payload.head(len) = packed[i].segment(begin, len);
        }
        const AirCompResult r = transmit_round(bf, links, options, rng);
        sum.segment(begin, n) = aircomp_average(r, r.contributors);
        mse_total += r.mse;
        for (std::size_t i = 0; i < links.size(); ++i)
            out.device_tx_energy[active[i]] += r.per_device_tx_power[i];
        for (int id : r.excluded_devices)
            if (std::find(out.excluded_devices.begin(), out.excluded_devices.end(), id) == out.excluded_devices.end())
                out.excluded_devices.push_back(id);
    }
    out.mean = complex_to_real(sum, dim);
    out.mean_mse = mse_total / static_cast<double>(uses);
    return out;
}

} // namespace edgeflow::aircomp
