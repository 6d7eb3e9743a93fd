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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace edgeflow::codebooks
{

/// Uniform scalar quantizer: 2^bits strictly increasing levels.
struct ScalarCodebook
{
    std::vector<double> levels;
    int bits = 0;

    std::size_t nearest(double x) const; // ties go to the lower level
    bool operator==(const ScalarCodebook &) const = default;
};

enum class Kind : std::uint8_t
{
    isotropic = 0,
    nonnegative = 1
};

/// Set of 2^bits real unit vectors, stored as the columns of a dim x 2^bits matrix.
struct GrassmannCodebook
{
    RealMatrix codewords;
    int bits = 0;
    Kind kind = Kind::isotropic;

    Eigen::Index dim() const noexcept { return codewords.rows(); }
    Eigen::Index size() const noexcept { return codewords.cols(); }

    /// Largest |<c_i, c_j>| over distinct codewords.
    double coherence() const;

    bool operator==(const GrassmannCodebook &o) const
    {
        return bits == o.bits && kind == o.kind && codewords.rows() == o.codewords.rows() &&
               codewords.cols() == o.codewords.cols() && codewords == o.codewords;
    }
};

struct CodebookBundle
{
    ScalarCodebook norm_cb;
    GrassmannCodebook block_cb; // dimension L, isotropic
    GrassmannCodebook hinge_cb; // dimension M, nonnegative
    int m = 0;
    int l = 0;

    bool operator==(const CodebookBundle &) const = default;
};

/// Welch lower bound on the coherence of `count` unit vectors in R^dim (0 when count <= dim).
double welch_bound(Eigen::Index dim, Eigen::Index count);

/// level_j = lo + (j + 0.5) (hi - lo) / 2^bits.
ScalarCodebook uniform_scalar_codebook(double lo, double hi, int bits);

struct PackingOptions
{
    int max_iters = 2000;
    double tol = 1e-6;
};

/// Grassmannian line packing by alternating projection between the
/// coherence-constrained Gram set and the rank-dim PSD set. Returns the
/// lowest-coherence iterate seen, restarting from a random frame on stalls.
RealMatrix pack_lines(int dim, Eigen::Index count, RngStream &rng, const PackingOptions &options = {});
GrassmannCodebook line_packing(int dim, int bits, RngStream &rng, const PackingOptions &options = {});

struct LloydOptions
{
    int max_iters = 100;
    double tol = 1e-8;
};

/// Lloyd training of a nonnegative Grassmannian codebook under the
/// distortion 1 - <x, c>. When `distortion_trace` is non-null it receives the
/// average distortion after every iteration (nonincreasing).
GrassmannCodebook lloyd_codebook(std::span<const RealVector> training, int bits, RngStream &rng,
                                 const LloydOptions &options = {}, std::vector<double> *distortion_trace = nullptr);

/// Unit vectors of i.i.d. |N(0,1)| entries, the fallback hinge training set.
std::vector<RealVector> abs_gaussian_directions(int dim, std::size_t count, RngStream &rng);

// Bundle file: little-endian; "ECLB", u16 version, u8 block kind, u8 hinge kind,
// u32 M, u32 L, u8 B_rho, u8 B_s, u8 B_h, then f64 levels, block codewords,
// hinge codewords (codeword by codeword).
inline constexpr std::uint16_t kBundleFormatVersion = 1;

std::vector<std::uint8_t> serialize(const CodebookBundle &bundle);
CodebookBundle deserialize(std::span<const std::uint8_t> bytes);

void save_bundle(const CodebookBundle &bundle, const std::filesystem::path &path);
CodebookBundle load_bundle(const std::filesystem::path &path);

} // namespace edgeflow::codebooks
