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

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

namespace edgeflow::codebooks
{

namespace
{

constexpr int kMaxBits = 24;

void require_bits(int bits)
{
    if (bits < 1 || bits > kMaxBits)
        throw InvalidInput("codebook bit width must be in [1, " + std::to_string(kMaxBits) + "], got " +
                           std::to_string(bits));
}

double frame_coherence(const RealMatrix &frame)
{
    const RealMatrix gram = frame.transpose() * frame;
    double mu = 0.0;
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            mu = std::max(mu, std::abs(gram(i, j)));
    return mu;
}

bool normalize_columns(RealMatrix &frame)
{
    for (Eigen::Index j = 0; j < frame.cols(); ++j)
    {
        const double n = frame.col(j).norm();
        if (!(n > 1e-300) || !std::isfinite(n))
            return false;
        frame.col(j) /= n;
    }
    return true;
}

// Index of the codeword maximizing <x, c>; ties go to the lowest index.
Eigen::Index best_codeword(const RealMatrix &codewords, const RealVector &x, double &score)
{
    const RealVector ip = codewords.transpose() * x;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < ip.size(); ++j)
        if (ip(j) > ip(best))
            best = j;
    score = ip(best);
    return best;
}

} // namespace

std::size_t ScalarCodebook::nearest(double x) const
{
    if (levels.empty())
        throw InvalidInput("empty scalar codebook");
    const auto it = std::lower_bound(levels.begin(), levels.end(), x);
    if (it == levels.begin())
        return 0;
    if (it == levels.end())
        return levels.size() - 1;
    const auto hi = static_cast<std::size_t>(it - levels.begin());
    return (x - levels[hi - 1] <= levels[hi] - x) ? hi - 1 : hi;
}

double GrassmannCodebook::coherence() const
{
    return frame_coherence(codewords);
}

double welch_bound(Eigen::Index dim, Eigen::Index count)
{
    if (count <= dim || count < 2)
        return 0.0;
    const double c = static_cast<double>(count);
    const double d = static_cast<double>(dim);
    return std::sqrt((c - d) / (d * (c - 1.0)));
}

ScalarCodebook uniform_scalar_codebook(double lo, double hi, int bits)
{
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidInput("scalar codebook range must satisfy lo < hi");
    require_bits(bits);
    const std::size_t count = std::size_t{1} << bits;
    const double delta = (hi - lo) / static_cast<double>(count);
    ScalarCodebook cb{std::vector<double>(count), bits};
    for (std::size_t j = 0; j < count; ++j)
        cb.levels[j] = lo + (static_cast<double>(j) + 0.5) * delta;
    return cb;
}

constexpr int kPackingStallLimit = 100;

RealMatrix pack_lines(int dim, Eigen::Index count, RngStream &rng, const PackingOptions &options)
{
    if (dim < 2)
        throw InvalidInput("line packing needs dim >= 2");
    if (count < 2)
        throw InvalidInput("line packing needs at least two lines");
    const Eigen::Index rank = std::min<Eigen::Index>(dim, count);
    const double floor = welch_bound(dim, count);

    const auto random_frame = [&]() {
        RealMatrix f(dim, count);
        for (Eigen::Index j = 0; j < count; ++j)
            for (Eigen::Index i = 0; i < dim; ++i)
                f(i, j) = rng.normal();
        normalize_columns(f);
        return f;
    };

    RealMatrix frame = random_frame();
    RealMatrix best = frame;
    double best_mu = frame_coherence(frame);
    double run_mu = best_mu;
    double target_shrink = 0.5;
    int stall = 0;

    for (int it = 0; it < options.max_iters && best_mu - floor > options.tol; ++it)
    {
        if (stall > kPackingStallLimit)
        {
            // Restart from a fresh random frame; the global best is kept.
            frame = random_frame();
            run_mu = frame_coherence(frame);
            target_shrink = 0.5;
            stall = 0;
        }
        const double target = floor + (1.0 - target_shrink) * (run_mu - floor);

        // Structural set: unit diagonal, off-diagonal magnitudes clipped to the target.
        RealMatrix gram = frame.transpose() * frame;
        for (Eigen::Index j = 0; j < count; ++j)
        {
            gram(j, j) = 1.0;
            for (Eigen::Index i = 0; i < j; ++i)
            {
                const double g = std::clamp(gram(i, j), -target, target);
                gram(i, j) = g;
                gram(j, i) = g;
            }
        }

        // Spectral set: PSD with rank at most dim; factor back into a frame.
        Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram);
        if (eig.info() != Eigen::Success)
            break;
        RealMatrix next = RealMatrix::Zero(dim, count);
        for (Eigen::Index r = 0; r < rank; ++r)
        {
            const Eigen::Index src = count - 1 - r;
            const double lambda = std::max(0.0, eig.eigenvalues()(src));
            next.row(r) = std::sqrt(lambda) * eig.eigenvectors().col(src).transpose();
        }
        if (!normalize_columns(next))
        {
            target_shrink *= 0.5;
            ++stall;
            continue;
        }
        frame = std::move(next);

        const double mu = frame_coherence(frame);
        if (mu < run_mu - options.tol)
        {
            run_mu = mu;
            stall = 0;
        }
        else
        {
            run_mu = std::min(run_mu, mu);
            ++stall;
        }
        if (mu < best_mu)
        {
            best = frame;
            best_mu = mu;
        }
    }

    return best;
}

GrassmannCodebook line_packing(int dim, int bits, RngStream &rng, const PackingOptions &options)
{
    require_bits(bits);
    return GrassmannCodebook{pack_lines(dim, Eigen::Index{1} << bits, rng, options), bits, Kind::isotropic};
}

std::vector<RealVector> abs_gaussian_directions(int dim, std::size_t count, RngStream &rng)
{
    if (dim < 1)
        throw InvalidInput("direction dimension must be positive");
    std::vector<RealVector> out;
    out.reserve(count);
    while (out.size() < count)
    {
        RealVector v(dim);
        for (int i = 0; i < dim; ++i)
            v(i) = std::abs(rng.normal());
        const double n = v.norm();
        if (n > 0.0)
            out.push_back(v / n);
    }
    return out;
}

GrassmannCodebook lloyd_codebook(std::span<const RealVector> training, int bits, RngStream &rng,
                                 const LloydOptions &options, std::vector<double> *distortion_trace)
{
    require_bits(bits);
    const std::size_t count = std::size_t{1} << bits;
    if (training.size() < count)
        throw InvalidInput("Lloyd training set has " + std::to_string(training.size()) + " vectors, fewer than " +
                           std::to_string(count) + " codewords");
    const Eigen::Index dim = training.front().size();
    for (const auto &x : training)
    {
        if (x.size() != dim)
            throw InvalidInput("Lloyd training vectors differ in dimension");
        if (!x.allFinite() || std::abs(x.norm() - 1.0) > 1e-8 || x.minCoeff() < 0.0)
            throw InvalidInput("Lloyd training vectors must be unit-norm and nonnegative");
    }

    const std::size_t n = training.size();
    RealMatrix codewords(dim, static_cast<Eigen::Index>(count));
    std::vector<double> gap(n, 2.0); // distortion to the nearest codeword chosen so far

    // Farthest-point seeding from one random training vector.
    std::size_t pick = rng.index(n);
    for (std::size_t c = 0; c < count; ++c)
    {
        codewords.col(static_cast<Eigen::Index>(c)) = training[pick];
        std::size_t far = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            gap[i] = std::min(gap[i], 1.0 - training[i].dot(training[pick]));
            if (gap[i] > gap[far])
                far = i;
        }
        pick = far;
    }

    std::vector<Eigen::Index> assignment(n, 0);
    std::vector<double> distortion(n, 0.0);
    double previous = std::numeric_limits<double>::infinity();

    for (int it = 0; it < options.max_iters; ++it)
    {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double score = 0.0;
            assignment[i] = best_codeword(codewords, training[i], score);
            distortion[i] = 1.0 - score;
            total += distortion[i];
        }
        const double avg = total / static_cast<double>(n);
        if (avg > previous + 1e-12)
            throw NumericalFailure("Lloyd distortion increased from " + std::to_string(previous) + " to " +
                                   std::to_string(avg));
        if (distortion_trace)
            distortion_trace->push_back(avg);
        if (previous - avg < options.tol)
            break;
        previous = avg;

        RealMatrix sums = RealMatrix::Zero(dim, static_cast<Eigen::Index>(count));
        std::vector<std::size_t> members(count, 0);
        for (std::size_t i = 0; i < n; ++i)
        {
            sums.col(assignment[i]) += training[i];
            ++members[static_cast<std::size_t>(assignment[i])];
        }

        std::vector<std::size_t> by_distortion(n);
        std::iota(by_distortion.begin(), by_distortion.end(), std::size_t{0});
        std::stable_sort(by_distortion.begin(), by_distortion.end(),
                         [&](std::size_t a, std::size_t b) { return distortion[a] > distortion[b]; });
        std::size_t next_far = 0;

        for (std::size_t c = 0; c < count; ++c)
        {
            const auto col = static_cast<Eigen::Index>(c);
            if (members[c] == 0)
            {
                codewords.col(col) = training[by_distortion[next_far++ % n]];
                continue;
            }
            RealVector mean = sums.col(col).cwiseMax(0.0);
            const double norm = mean.norm();
            if (norm > 0.0)
                codewords.col(col) = mean / norm;
        }
    }

    return GrassmannCodebook{std::move(codewords), bits, Kind::nonnegative};
}

namespace
{

class Writer
{
  public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u16(std::uint16_t v)
    {
        for (int i = 0; i < 2; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v)
    {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

  private:
    std::vector<std::uint8_t> bytes_;
};

class Reader
{
  public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t uint(int width)
    {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(uint(8)); }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    void need(std::size_t n) const
    {
        if (remaining() < n)
            throw FormatError("codebook stream truncated at byte " + std::to_string(pos_));
    }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr char kMagic[4] = {'E', 'C', 'L', 'B'};

void write_codewords(Writer &w, const GrassmannCodebook &cb)
{
    for (Eigen::Index j = 0; j < cb.codewords.cols(); ++j)
        for (Eigen::Index i = 0; i < cb.codewords.rows(); ++i)
            w.f64(cb.codewords(i, j));
}

GrassmannCodebook read_codewords(Reader &r, Eigen::Index dim, int bits, Kind kind)
{
    const Eigen::Index count = Eigen::Index{1} << bits;
    r.need(static_cast<std::size_t>(dim * count) * 8);
    GrassmannCodebook cb{RealMatrix(dim, count), bits, kind};
    for (Eigen::Index j = 0; j < count; ++j)
    {
        for (Eigen::Index i = 0; i < dim; ++i)
            cb.codewords(i, j) = r.f64();
        if (!cb.codewords.col(j).allFinite() || std::abs(cb.codewords.col(j).norm() - 1.0) > 1e-10)
            throw FormatError("codeword " + std::to_string(j) + " is not unit norm");
        if (kind == Kind::nonnegative && cb.codewords.col(j).minCoeff() < 0.0)
            throw FormatError("nonnegative codeword " + std::to_string(j) + " has a negative entry");
    }
    return cb;
}

Kind read_kind(std::uint64_t tag)
{
    if (tag > 1)
        throw FormatError("unknown codebook kind tag " + std::to_string(tag));
    return static_cast<Kind>(tag);
}

} // namespace

std::vector<std::uint8_t> serialize(const CodebookBundle &bundle)
{
    if (bundle.block_cb.dim() != bundle.l || bundle.hinge_cb.dim() != bundle.m)
        throw InvalidInput("bundle codeword dimensions disagree with (M, L)");
    Writer w;
    for (char c : kMagic)
        w.u8(static_cast<std::uint8_t>(c));
    w.u16(kBundleFormatVersion);
    w.u8(static_cast<std::uint8_t>(bundle.block_cb.kind));
    w.u8(static_cast<std::uint8_t>(bundle.hinge_cb.kind));
    w.u32(static_cast<std::uint32_t>(bundle.m));
    w.u32(static_cast<std::uint32_t>(bundle.l));
    w.u8(static_cast<std::uint8_t>(bundle.norm_cb.bits));
    w.u8(static_cast<std::uint8_t>(bundle.block_cb.bits));
    w.u8(static_cast<std::uint8_t>(bundle.hinge_cb.bits));
    for (double level : bundle.norm_cb.levels)
        w.f64(level);
    write_codewords(w, bundle.block_cb);
    write_codewords(w, bundle.hinge_cb);
    return w.take();
}

CodebookBundle deserialize(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    for (char c : kMagic)
        if (r.uint(1) != static_cast<std::uint8_t>(c))
            throw FormatError("bad magic: not a codebook bundle");
    const auto version = r.uint(2);
    if (version != kBundleFormatVersion)
        throw FormatError("unsupported codebook format version " + std::to_string(version));
    const Kind block_kind = read_kind(r.uint(1));
    const Kind hinge_kind = read_kind(r.uint(1));
    CodebookBundle b;
    b.m = static_cast<int>(r.uint(4));
    b.l = static_cast<int>(r.uint(4));
    const int b_rho = static_cast<int>(r.uint(1));
    const int b_s = static_cast<int>(r.uint(1));
    const int b_h = static_cast<int>(r.uint(1));
    if (b.m < 1 || b.l < 1)
        throw FormatError("bundle dimensions must be positive");
    for (int bits : {b_rho, b_s, b_h})
        if (bits < 1 || bits > kMaxBits)
            throw FormatError("bit width out of range: " + std::to_string(bits));

    const std::size_t n_levels = std::size_t{1} << b_rho;
    r.need(n_levels * 8);
    b.norm_cb.bits = b_rho;
    b.norm_cb.levels.resize(n_levels);
    for (auto &level : b.norm_cb.levels)
        level = r.f64();
    for (std::size_t j = 1; j < n_levels; ++j)
        if (!(b.norm_cb.levels[j] > b.norm_cb.levels[j - 1]))
            throw FormatError("scalar levels are not strictly increasing");

    b.block_cb = read_codewords(r, b.l, b_s, block_kind);
    b.hinge_cb = read_codewords(r, b.m, b_h, hinge_kind);
    if (r.remaining() != 0)
        throw FormatError("trailing bytes after codebook bundle");
    return b;
}

void save_bundle(const CodebookBundle &bundle, const std::filesystem::path &path)
{
    const auto bytes = serialize(bundle);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error("failed writing " + path.string());
}

CodebookBundle load_bundle(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace edgeflow::codebooks
