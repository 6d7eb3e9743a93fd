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

#include "edgeflow/gradquant.hpp"

#include "edgeflow/errors.hpp"

#include <cmath>
#include <string>

namespace edgeflow::gradquant
{

namespace
{

int block_length(Eigen::Index dim, int m)
{
    return static_cast<int>((dim + m - 1) / m);
}

void check_compatible(Eigen::Index dim, const codebooks::CodebookBundle &bundle)
{
    if (bundle.m < 1 || bundle.block_cb.dim() != bundle.l || bundle.hinge_cb.dim() != bundle.m)
        throw DimensionMismatch("codebook bundle is internally inconsistent");
    if (block_length(dim, bundle.m) != bundle.l)
        throw DimensionMismatch("gradient of length " + std::to_string(dim) + " split into " +
                                std::to_string(bundle.m) + " blocks needs L = " +
                                std::to_string(block_length(dim, bundle.m)) + ", bundle has L = " +
                                std::to_string(bundle.l));
}

class BitWriter
{
  public:
    void put(std::uint32_t value, int width)
    {
        for (int b = width - 1; b >= 0; --b)
        {
            if (used_ % 8 == 0)
                bytes_.push_back(0);
            if ((value >> b) & 1U)
                bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (used_ % 8));
            ++used_;
        }
    }
    std::vector<std::uint8_t> &bytes() { return bytes_; }

  private:
    std::vector<std::uint8_t> bytes_;
    std::size_t used_ = 0;
};

class BitReader
{
  public:
    explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
    std::uint32_t get(int width)
    {
        std::uint32_t v = 0;
        for (int b = 0; b < width; ++b, ++pos_)
        {
            const std::uint8_t byte = bytes_[pos_ / 8];
            v = (v << 1) | ((byte >> (7 - pos_ % 8)) & 1U);
        }
        return v;
    }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

void put_be32(std::vector<std::uint8_t> &out, std::uint32_t v)
{
    for (int i = 3; i >= 0; --i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_be32(std::span<const std::uint8_t> in, std::size_t at)
{
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i)
        v = (v << 8) | in[at + i];
    return v;
}

} // namespace

GradientDecomposition decompose(const RealVector &g, int m)
{
    if (m < 1)
        throw InvalidInput("block count must be positive");
    if (g.size() < 1 || !g.allFinite())
        throw InvalidInput("gradient must be non-empty and finite");

    GradientDecomposition d;
    d.m = m;
    d.l = block_length(g.size(), m);
    d.dim = g.size();
    d.rho = g.norm();
    d.hinge = RealVector::Zero(m);
    d.block_dirs.assign(static_cast<std::size_t>(m), RealVector::Unit(d.l, 0));

    if (d.rho == 0.0)
    {
        d.hinge(0) = 1.0;
        return d;
    }

    RealVector padded = RealVector::Zero(static_cast<Eigen::Index>(m) * d.l);
    padded.head(g.size()) = g;
    for (int i = 0; i < m; ++i)
    {
        const auto block = padded.segment(static_cast<Eigen::Index>(i) * d.l, d.l);
        const double norm = block.norm();
        if (norm > 0.0)
        {
            d.block_dirs[static_cast<std::size_t>(i)] = block / norm;
            d.hinge(i) = norm / d.rho;
        }
    }
    d.hinge /= d.hinge.norm();
    return d;
}

RealVector reassemble(const GradientDecomposition &d)
{
    RealVector padded(static_cast<Eigen::Index>(d.m) * d.l);
    for (int i = 0; i < d.m; ++i)
        padded.segment(static_cast<Eigen::Index>(i) * d.l, d.l) =
            d.rho * d.hinge(i) * d.block_dirs[static_cast<std::size_t>(i)];
    return padded.head(d.dim);
}

HierarchicalCode quantize(const RealVector &g, const codebooks::CodebookBundle &bundle)
{
    check_compatible(g.size(), bundle);
    const GradientDecomposition d = decompose(g, bundle.m);

    HierarchicalCode code;
    code.dim = static_cast<std::uint32_t>(g.size());
    code.m = bundle.m;
    code.b_rho = bundle.norm_cb.bits;
    code.b_s = bundle.block_cb.bits;
    code.b_h = bundle.hinge_cb.bits;
    code.norm_index = static_cast<std::uint32_t>(bundle.norm_cb.nearest(d.rho));

    const RealMatrix &blocks = bundle.block_cb.codewords;
    code.block_indices.reserve(static_cast<std::size_t>(d.m));
    code.block_signs.reserve(static_cast<std::size_t>(d.m));
    for (const auto &s : d.block_dirs)
    {
        const RealVector ip = blocks.transpose() * s;
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < ip.size(); ++j)
            if (std::abs(ip(j)) > std::abs(ip(best)))
                best = j;
        code.block_indices.push_back(static_cast<std::uint32_t>(best));
        code.block_signs.push_back(ip(best) >= 0.0 ? 1 : -1);
    }

    const RealVector hip = bundle.hinge_cb.codewords.transpose() * d.hinge;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < hip.size(); ++j)
        if (hip(j) > hip(best))
            best = j;
    code.hinge_index = static_cast<std::uint32_t>(best);
    return code;
}

RealVector dequantize(const HierarchicalCode &code, const codebooks::CodebookBundle &bundle)
{
    if (code.m != bundle.m || code.b_rho != bundle.norm_cb.bits || code.b_s != bundle.block_cb.bits ||
        code.b_h != bundle.hinge_cb.bits)
        throw FormatError("code bit widths do not match the codebook bundle");
    check_compatible(code.dim, bundle);
    if (code.block_indices.size() != static_cast<std::size_t>(code.m) ||
        code.block_signs.size() != static_cast<std::size_t>(code.m))
        throw FormatError("code carries the wrong number of blocks");
    if (code.norm_index >= bundle.norm_cb.levels.size() ||
        code.hinge_index >= static_cast<std::uint32_t>(bundle.hinge_cb.size()))
        throw FormatError("code index out of range");

    const double rho = bundle.norm_cb.levels[code.norm_index];
    const auto hinge = bundle.hinge_cb.codewords.col(code.hinge_index);
    RealVector padded(static_cast<Eigen::Index>(code.m) * bundle.l);
    for (int i = 0; i < code.m; ++i)
    {
        const std::uint32_t idx = code.block_indices[static_cast<std::size_t>(i)];
        const std::int8_t sign = code.block_signs[static_cast<std::size_t>(i)];
        if (idx >= static_cast<std::uint32_t>(bundle.block_cb.size()) || (sign != 1 && sign != -1))
            throw FormatError("block " + std::to_string(i) + " code out of range");
        padded.segment(static_cast<Eigen::Index>(i) * bundle.l, bundle.l) =
            (rho * hinge(i) * sign) * bundle.block_cb.codewords.col(idx);
    }
    return padded.head(code.dim);
}

SignCode signsgd_quantize(const RealVector &g)
{
    if (!g.allFinite())
        throw InvalidInput("gradient must be finite");
    SignCode code;
    code.signs.reserve(static_cast<std::size_t>(g.size()));
    for (Eigen::Index i = 0; i < g.size(); ++i)
        code.signs.push_back(g(i) >= 0.0 ? 1 : -1);
    return code;
}

RealVector signsgd_dequantize(const SignCode &code)
{
    RealVector out(static_cast<Eigen::Index>(code.signs.size()));
    for (std::size_t i = 0; i < code.signs.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = code.signs[i];
    return out;
}

double bits_per_coefficient(const HierarchicalCode &code)
{
    if (code.dim == 0)
        throw InvalidInput("empty code");
    return static_cast<double>(code.payload_bits()) / static_cast<double>(code.dim);
}

double bits_per_coefficient(const SignCode &code)
{
    if (code.signs.empty())
        throw InvalidInput("empty code");
    return static_cast<double>(code.payload_bits()) / static_cast<double>(code.signs.size());
}

std::vector<std::uint8_t> encode_wire(const HierarchicalCode &code)
{
    if (code.block_indices.size() != static_cast<std::size_t>(code.m) ||
        code.block_signs.size() != static_cast<std::size_t>(code.m))
        throw InvalidInput("code block count disagrees with M");
    for (int width : {code.b_rho, code.b_s, code.b_h})
        if (width < 1 || width > 24)
            throw InvalidInput("bit width out of range");
    const auto fits = [](std::uint32_t v, int width) { return v < (std::uint32_t{1} << width); };
    if (!fits(code.norm_index, code.b_rho) || !fits(code.hinge_index, code.b_h))
        throw InvalidInput("index exceeds its bit width");

    std::vector<std::uint8_t> out;
    out.reserve(kWireHeaderBytes + (code.payload_bits() + 7) / 8);
    put_be32(out, code.dim);
    put_be32(out, static_cast<std::uint32_t>(code.m));
    out.push_back(static_cast<std::uint8_t>(code.b_rho));
    out.push_back(static_cast<std::uint8_t>(code.b_s));
    out.push_back(static_cast<std::uint8_t>(code.b_h));
    out.resize(kWireHeaderBytes, 0);

    BitWriter bits;
    bits.put(code.norm_index, code.b_rho);
    for (int i = 0; i < code.m; ++i)
    {
        const auto idx = code.block_indices[static_cast<std::size_t>(i)];
        if (!fits(idx, code.b_s))
            throw InvalidInput("block index exceeds its bit width");
        bits.put(idx, code.b_s);
        bits.put(code.block_signs[static_cast<std::size_t>(i)] < 0 ? 1U : 0U, 1);
    }
    bits.put(code.hinge_index, code.b_h);
    out.insert(out.end(), bits.bytes().begin(), bits.bytes().end());
    return out;
}

HierarchicalCode decode_wire(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < kWireHeaderBytes)
        throw FormatError("code stream shorter than its header");
    HierarchicalCode code;
    code.dim = get_be32(bytes, 0);
    const std::uint32_t m = get_be32(bytes, 4);
    code.b_rho = bytes[8];
    code.b_s = bytes[9];
    code.b_h = bytes[10];
    for (std::size_t i = 11; i < kWireHeaderBytes; ++i)
        if (bytes[i] != 0)
            throw FormatError("reserved header bytes must be zero");
    if (code.dim == 0 || m == 0 || m > code.dim)
        throw FormatError("invalid code dimensions");
    for (int width : {code.b_rho, code.b_s, code.b_h})
        if (width < 1 || width > 24)
            throw FormatError("bit width out of range");
    code.m = static_cast<int>(m);

    const std::size_t expected = kWireHeaderBytes + (code.payload_bits() + 7) / 8;
    if (bytes.size() != expected)
        throw FormatError("code stream has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(expected));

    BitReader bits(bytes.subspan(kWireHeaderBytes));
    code.norm_index = bits.get(code.b_rho);
    code.block_indices.reserve(m);
    code.block_signs.reserve(m);
    for (std::uint32_t i = 0; i < m; ++i)
    {
        code.block_indices.push_back(bits.get(code.b_s));
        code.block_signs.push_back(bits.get(1) ? -1 : 1);
    }
    code.hinge_index = bits.get(code.b_h);
    return code;
}

} // namespace edgeflow::gradquant
