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

#include "edgeflow/codebooks.hpp"
#include "edgeflow/errors.hpp"
#include "edgeflow/gradquant.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace edgeflow;
using namespace edgeflow::gradquant;
using codebooks::CodebookBundle;

namespace
{

RealVector gaussian(Eigen::Index n, RngStream &rng)
{
    RealVector g(n);
    for (Eigen::Index i = 0; i < n; ++i)
        g(i) = rng.normal();
    return g;
}

CodebookBundle make_bundle(Eigen::Index dim, int m, int b_rho, int b_s, int b_h, std::uint64_t seed,
                           double norm_hi = 20.0)
{
    RngStream rng(seed, 0);
    CodebookBundle b;
    b.m = m;
    b.l = static_cast<int>((dim + m - 1) / m);
    b.norm_cb = codebooks::uniform_scalar_codebook(0.0, norm_hi, b_rho);
    b.block_cb = codebooks::line_packing(b.l, b_s, rng, {300, 1e-6});
    b.hinge_cb = codebooks::lloyd_codebook(codebooks::abs_gaussian_directions(m, std::size_t{4} << b_h, rng), b_h,
                                           rng, {50, 1e-8});
    return b;
}

double cosine(const RealVector &a, const RealVector &b)
{
    return a.dot(b) / (a.norm() * b.norm());
}

// Exhaustive search over every codeword and both signs for min ||s - (+-c)||.
std::pair<std::uint32_t, int> nearest_signed(const RealVector &s, const RealMatrix &codewords)
{
    std::uint32_t best = 0;
    int best_sign = 1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < codewords.cols(); ++j)
        for (int sign : {1, -1})
        {
            double dist = 0.0;
            for (Eigen::Index i = 0; i < s.size(); ++i)
            {
                const double diff = s(i) - sign * codewords(i, j);
                dist += diff * diff;
            }
            if (dist < best_dist - 1e-15)
            {
                best_dist = dist;
                best = static_cast<std::uint32_t>(j);
                best_sign = sign;
            }
        }
    return {best, best_sign};
}

} // namespace

TEST_CASE("decompose a single block")
{
    RealVector g(2);
    g << 3.0, 4.0;
    const auto d = decompose(g, 1);
    CHECK(d.rho == doctest::Approx(5.0));
    CHECK(d.block_dirs[0](0) == doctest::Approx(0.6));
    CHECK(d.block_dirs[0](1) == doctest::Approx(0.8));
    CHECK(d.hinge(0) == doctest::Approx(1.0));
}

TEST_CASE("decompose symmetric blocks")
{
    RealVector g(4);
    g << 1.0, 0.0, 0.0, 1.0;
    const auto d = decompose(g, 2);
    CHECK(d.rho == doctest::Approx(std::sqrt(2.0)));
    CHECK((d.block_dirs[0] - RealVector::Unit(2, 0)).norm() < 1e-15);
    CHECK((d.block_dirs[1] - RealVector::Unit(2, 1)).norm() < 1e-15);
    CHECK(d.hinge(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(d.hinge(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("decompose reassembles exactly and pads")
{
    RngStream rng(1, 0);
    for (int trial = 0; trial < 100; ++trial)
    {
        for (auto [dim, m] : std::vector<std::pair<int, int>>{{64, 8}, {65, 4}, {7, 3}, {10, 10}})
        {
            const RealVector g = gaussian(dim, rng);
            const auto d = decompose(g, m);
            CHECK(d.l == (dim + m - 1) / m);
            CHECK(d.m * d.l >= dim);
            RealVector manual = RealVector::Zero(d.m * d.l);
            for (int i = 0; i < m; ++i)
            {
                CHECK(std::abs(d.block_dirs[i].norm() - 1.0) < 1e-10);
                for (int k = 0; k < d.l; ++k)
                    manual(i * d.l + k) = d.rho * d.hinge(i) * d.block_dirs[i](k);
            }
            CHECK((manual.head(dim) - g).norm() / g.norm() < 1e-12);
            CHECK(manual.tail(d.m * d.l - dim).norm() < 1e-15);
            CHECK((reassemble(d) - g).norm() / g.norm() < 1e-12);
            CHECK(std::abs(d.hinge.squaredNorm() - 1.0) < 1e-10);
            CHECK(d.hinge.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("decompose zero and partially zero gradients")
{
    const auto z = decompose(RealVector::Zero(6), 3);
    CHECK(z.rho == 0.0);
    CHECK(z.hinge(0) == 1.0);
    CHECK(z.hinge(1) == 0.0);
    CHECK(z.hinge(2) == 0.0);
    CHECK((reassemble(z)).norm() == 0.0);

    RealVector g = RealVector::Zero(6);
    g(4) = -2.0;
    const auto d = decompose(g, 3);
    CHECK((d.block_dirs[0] - RealVector::Unit(2, 0)).norm() == 0.0);
    CHECK(d.hinge(0) == 0.0);
    CHECK(d.hinge(2) == doctest::Approx(1.0));
    CHECK((reassemble(d) - g).norm() < 1e-15);

    RealVector bad = RealVector::Ones(3);
    bad(1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(decompose(bad, 1), InvalidInput);
}

TEST_CASE("normalized block gradients are isotropic")
{
    RngStream rng(2, 0);
    RealVector mean = RealVector::Zero(8);
    const int n = 10000;
    for (int t = 0; t < n; ++t)
        mean += decompose(gaussian(64, rng), 8).block_dirs[3];
    CHECK((mean / n).norm() < 0.05);
}

TEST_CASE("quantize codeword fixed points and antipodes")
{
    const auto b = make_bundle(8, 2, 4, 3, 2, 3);
    RealVector g(8);
    g.head(4) = b.block_cb.codewords.col(5);
    g.tail(4) = -b.block_cb.codewords.col(2);
    const auto code = quantize(g, b);
    CHECK(code.block_indices[0] == 5);
    CHECK(code.block_signs[0] == 1);
    CHECK(code.block_indices[1] == 2);
    CHECK(code.block_signs[1] == -1);
}

TEST_CASE("quantize matches exhaustive nearest-codeword search")
{
    const auto b = make_bundle(32, 4, 4, 2, 3, 4);
    RngStream rng(4, 1);
    for (int t = 0; t < 200; ++t)
    {
        const RealVector g = gaussian(32, rng);
        const auto code = quantize(g, b);
        const auto d = decompose(g, 4);
        for (int i = 0; i < 4; ++i)
        {
            const auto [idx, sign] = nearest_signed(d.block_dirs[i], b.block_cb.codewords);
            CHECK(code.block_indices[i] == idx);
            CHECK(code.block_signs[i] == sign);
        }
        double best = -2.0;
        std::uint32_t hinge = 0;
        for (Eigen::Index j = 0; j < b.hinge_cb.size(); ++j)
        {
            const double ip = d.hinge.dot(b.hinge_cb.codewords.col(j));
            if (ip > best)
            {
                best = ip;
                hinge = static_cast<std::uint32_t>(j);
            }
        }
        CHECK(code.hinge_index == hinge);
        double nearest_level = std::numeric_limits<double>::infinity();
        for (double level : b.norm_cb.levels)
            nearest_level = std::min(nearest_level, std::abs(level - d.rho));
        CHECK(std::abs(b.norm_cb.levels[code.norm_index] - d.rho) == doctest::Approx(nearest_level));
        CHECK(code.payload_bits() == 4 + 4 * (2 + 1) + 3);
    }
}

TEST_CASE("quantize rejects incompatible bundles")
{
    const auto b = make_bundle(16, 4, 3, 2, 2, 5);
    RngStream rng(5, 0);
    CHECK_THROWS_AS(quantize(gaussian(20, rng), b), DimensionMismatch);
    CHECK_NOTHROW(quantize(gaussian(15, rng), b)); // pads to 16
}

TEST_CASE("dequantize a codeword-aligned gradient exactly")
{
    auto b = make_bundle(8, 2, 3, 3, 2, 6);
    // Hinge codeword with both entries positive, so both blocks survive.
    RealVector h(2);
    h << 0.6, 0.8;
    b.hinge_cb.codewords.col(1) = h;
    const double rho = b.norm_cb.levels[5];
    RealVector g(8);
    g.head(4) = rho * h(0) * b.block_cb.codewords.col(3);
    g.tail(4) = -rho * h(1) * b.block_cb.codewords.col(6);
    const auto code = quantize(g, b);
    CHECK(code.norm_index == 5);
    CHECK(code.hinge_index == 1);
    CHECK((dequantize(code, b) - g).norm() < 1e-9);
}

TEST_CASE("dequantize the zero-norm level")
{
    const auto b = make_bundle(10, 2, 8, 2, 2, 7, 1.0);
    const auto code = quantize(RealVector::Zero(10), b);
    CHECK(code.norm_index == 0);
    const RealVector back = dequantize(code, b);
    CHECK(back.size() == 10);
    CHECK(back.norm() <= b.norm_cb.levels[0] + 1e-15);
}

TEST_CASE("dequantize rejects malformed codes")
{
    const auto b = make_bundle(8, 2, 3, 2, 2, 8);
    RngStream rng(8, 0);
    const auto code = quantize(gaussian(8, rng), b);
    auto bad = code;
    bad.norm_index = 8;
    CHECK_THROWS_AS(dequantize(bad, b), FormatError);
    bad = code;
    bad.block_indices[1] = 4;
    CHECK_THROWS_AS(dequantize(bad, b), FormatError);
    bad = code;
    bad.hinge_index = 4;
    CHECK_THROWS_AS(dequantize(bad, b), FormatError);
    bad = code;
    bad.block_signs[0] = 0;
    CHECK_THROWS_AS(dequantize(bad, b), FormatError);
    bad = code;
    bad.b_s = 3;
    CHECK_THROWS_AS(dequantize(bad, b), FormatError);
}

TEST_CASE("quantize after dequantize is idempotent")
{
    const auto b = make_bundle(64, 4, 4, 4, 6, 9);
    RngStream rng(9, 1);
    for (int t = 0; t < 200; ++t)
    {
        const auto code = quantize(gaussian(64, rng) * 3.0, b);
        CHECK(quantize(dequantize(code, b), b) == code);
    }
}

TEST_CASE("directional fidelity improves with block bits")
{
    RngStream rng(10, 0);
    std::vector<RealVector> gs;
    for (int t = 0; t < 200; ++t)
        gs.push_back(gaussian(64, rng));
    double prev = -1.0;
    for (int b_s : {2, 4, 6, 8})
    {
        const auto b = make_bundle(64, 8, 6, b_s, 6, 10 + static_cast<std::uint64_t>(b_s));
        double sum = 0.0;
        for (const auto &g : gs)
            sum += cosine(g, dequantize(quantize(g, b), b));
        const double mean = sum / static_cast<double>(gs.size());
        CHECK(mean >= prev);
        prev = mean;
    }
}

TEST_CASE("directional fidelity at default widths")
{
    const auto b = make_bundle(64, 4, 4, 4, 8, 11);
    RngStream rng(11, 0);
    int positive = 0;
    const int n = 1000;
    for (int t = 0; t < n; ++t)
    {
        const RealVector g = gaussian(64, rng);
        positive += cosine(g, dequantize(quantize(g, b), b)) > 0.0 ? 1 : 0;
    }
    CHECK(positive >= 990);
}

TEST_CASE("signSGD")
{
    RealVector g(3);
    g << 0.3, -1.2, 0.0;
    const auto code = signsgd_quantize(g);
    CHECK(code.signs == std::vector<std::int8_t>{1, -1, 1});
    CHECK(code.payload_bits() == 3);
    CHECK(bits_per_coefficient(code) == 1.0);
    CHECK(signsgd_quantize(10.0 * g) == code);
    const RealVector back = signsgd_dequantize(code);
    CHECK(back(0) == 1.0);
    CHECK(back(1) == -1.0);
    CHECK(back(2) == 1.0);
}

TEST_CASE("bits per coefficient")
{
    HierarchicalCode c;
    c.dim = 1024;
    c.m = 32;
    c.b_rho = 16;
    c.b_s = 12;
    c.b_h = 16;
    CHECK(bits_per_coefficient(c) == doctest::Approx((16.0 + 32.0 * 13.0 + 16.0) / 1024.0));
    CHECK(bits_per_coefficient(c) == doctest::Approx(0.4375));
    c.m = 1;
    c.dim = 100;
    CHECK(bits_per_coefficient(c) == doctest::Approx((16.0 + 12.0 + 1.0 + 16.0) / 100.0));
}

TEST_CASE("wire format round trip and layout")
{
    const auto b = make_bundle(64, 4, 4, 4, 8, 12);
    RngStream rng(12, 0);
    for (int t = 0; t < 100; ++t)
    {
        const auto code = quantize(gaussian(63, rng), b);
        const auto wire = encode_wire(code);
        CHECK(wire.size() == kWireHeaderBytes + (code.payload_bits() + 7) / 8);
        CHECK(decode_wire(wire) == code);
        CHECK(encode_wire(decode_wire(wire)) == wire);
    }

    HierarchicalCode c;
    c.dim = 0x01020304;
    c.m = 2;
    c.b_rho = 3;
    c.b_s = 2;
    c.b_h = 4;
    c.norm_index = 0b101;
    c.block_indices = {0b11, 0b01};
    c.block_signs = {1, -1};
    c.hinge_index = 0b1001;
    const auto w = encode_wire(c);
    const std::vector<std::uint8_t> header{1, 2, 3, 4, 0, 0, 0, 2, 3, 2, 4, 0, 0, 0, 0, 0};
    CHECK(std::vector<std::uint8_t>(w.begin(), w.begin() + 16) == header);
    // 101 | 11 0 | 01 1 | 1001  ->  1011 1001 | 1100 1000
    REQUIRE(w.size() == 18);
    CHECK(w[16] == 0b10111001);
    CHECK(w[17] == 0b11001000);

    auto truncated = w;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_wire(truncated), FormatError);
    auto extra = w;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_wire(extra), FormatError);
    auto reserved = w;
    reserved[12] = 1;
    CHECK_THROWS_AS(decode_wire(reserved), FormatError);
    auto widths = w;
    widths[9] = 0;
    CHECK_THROWS_AS(decode_wire(widths), FormatError);
}
