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

#include "edgeflow/codebooks.hpp"
#include "edgeflow/linalg.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace edgeflow::gradquant
{

/// g = rho * [h_1 s_1; ...; h_M s_M] after zero-padding g to M * L entries.
struct GradientDecomposition
{
    double rho = 0.0;
    std::vector<RealVector> block_dirs; // M unit vectors of length L
    RealVector hinge;                   // unit norm, nonnegative, length M
    int m = 0;
    int l = 0;
    Eigen::Index dim = 0; // original (unpadded) length
};

GradientDecomposition decompose(const RealVector &g, int m);
RealVector reassemble(const GradientDecomposition &d);

struct HierarchicalCode
{
    std::uint32_t dim = 0;
    int m = 0;
    int b_rho = 0;
    int b_s = 0;
    int b_h = 0;
    std::uint32_t norm_index = 0;
    std::vector<std::uint32_t> block_indices;
    std::vector<std::int8_t> block_signs; // +1 or -1
    std::uint32_t hinge_index = 0;

    std::size_t payload_bits() const
    {
        return static_cast<std::size_t>(b_rho) + static_cast<std::size_t>(m) * (b_s + 1) +
               static_cast<std::size_t>(b_h);
    }
    bool operator==(const HierarchicalCode &) const = default;
};

struct SignCode
{
    std::vector<std::int8_t> signs;
    std::optional<double> scale; // diagnostics only, never counted as payload

    std::size_t payload_bits() const { return signs.size(); }
    bool operator==(const SignCode &) const = default;
};

HierarchicalCode quantize(const RealVector &g, const codebooks::CodebookBundle &bundle);
RealVector dequantize(const HierarchicalCode &code, const codebooks::CodebookBundle &bundle);

SignCode signsgd_quantize(const RealVector &g);
RealVector signsgd_dequantize(const SignCode &code);

double bits_per_coefficient(const HierarchicalCode &code);
double bits_per_coefficient(const SignCode &code);

// Wire format: 16-byte header (dim u32, M u32, B_rho u8, B_s u8, B_h u8, 5 reserved
// zero bytes; integers big-endian) followed by the payload bits MSB-first:
// norm index, then (block index, sign bit) per block, then hinge index,
// zero-padded to a whole byte. Sign bit 1 means negative.
inline constexpr std::size_t kWireHeaderBytes = 16;

std::vector<std::uint8_t> encode_wire(const HierarchicalCode &code);
HierarchicalCode decode_wire(std::span<const std::uint8_t> bytes);

} // namespace edgeflow::gradquant
