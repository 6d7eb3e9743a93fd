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

#include "edgeflow/learners.hpp"

#include "edgeflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

namespace edgeflow::learners
{

namespace
{

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const RowMatrix>;
using MatMap = Eigen::Map<RowMatrix>;

double softplus(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z)
{
    if (z >= 0.0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void require_signed(const Sample &s)
{
    if (s.label != 1 && s.label != -1)
        throw InvalidInput("SVM labels must be -1 or +1");
}

// Views of the flat parameter vector; layout W1, b1[, W2, b2], matrices row-major (out x in).
struct Layers
{
    const Architecture &arch;
    const double *data;

    ConstMatMap w1() const
    {
        const int rows = arch.hidden > 0 ? arch.hidden : arch.outputs();
        return ConstMatMap(data, rows, arch.input_dim);
    }
    Eigen::Map<const RealVector> b1() const
    {
        const int rows = arch.hidden > 0 ? arch.hidden : arch.outputs();
        return Eigen::Map<const RealVector>(data + static_cast<std::ptrdiff_t>(rows) * arch.input_dim, rows);
    }
    std::ptrdiff_t second_offset() const
    {
        return static_cast<std::ptrdiff_t>(arch.hidden) * (arch.input_dim + 1);
    }
    ConstMatMap w2() const { return ConstMatMap(data + second_offset(), arch.outputs(), arch.hidden); }
    Eigen::Map<const RealVector> b2() const
    {
        return Eigen::Map<const RealVector>(
            data + second_offset() + static_cast<std::ptrdiff_t>(arch.outputs()) * arch.hidden, arch.outputs());
    }
};

void check_sample(const FedModel &model, const Sample &s)
{
    if (s.features.size() != model.arch.input_dim)
        throw InvalidInput("sample has " + std::to_string(s.features.size()) + " features, model expects " +
                           std::to_string(model.arch.input_dim));
    if (s.label < 0 || s.label >= model.arch.num_classes)
        throw InvalidInput("label " + std::to_string(s.label) + " outside [0, " +
                           std::to_string(model.arch.num_classes) + ")");
}

void check_model(const FedModel &model)
{
    if (model.parameters.size() != model.arch.parameter_count())
        throw InvalidInput("parameter vector does not match the architecture");
}

struct Forward
{
    RealVector hidden; // empty for logistic regression
    RealVector logits;
};

Forward forward(const FedModel &model, const RealVector &x)
{
    const Layers layers{model.arch, model.parameters.data()};
    Forward f;
    if (model.arch.hidden == 0)
    {
        f.logits = layers.w1() * x + layers.b1();
        return f;
    }
    f.hidden = (layers.w1() * x + layers.b1()).array().tanh();
    f.logits = layers.w2() * f.hidden + layers.b2();
    return f;
}

// d loss / d logits and the loss itself.
double logit_gradient(const RealVector &logits, int label, RealVector &dz)
{
    if (logits.size() == 1)
    {
        const double z = logits(0);
        dz.resize(1);
        dz(0) = sigmoid(z) - label;
        return label == 1 ? softplus(-z) : softplus(z);
    }
    const double top = logits.maxCoeff();
    const RealVector e = (logits.array() - top).exp();
    const double total = e.sum();
    dz = e / total;
    dz(label) -= 1.0;
    return top + std::log(total) - logits(label);
}

} // namespace

// ---------------------------------------------------------------- SVM ----

double svm_objective(const SvmModel &model, std::span<const Sample> data)
{
    double hinge = 0.0;
    for (const auto &s : data)
        hinge += std::max(0.0, 1.0 - s.label * model.decision(s.features));
    return model.w.squaredNorm() / (2.0 * model.c) + hinge / static_cast<double>(data.size());
}

SvmModel svm_init(std::span<const Sample> seed, double c, const SvmInitOptions &options)
{
    if (!(c > 0.0))
        throw InvalidInput("SVM penalty C must be positive");
    if (seed.empty())
        throw InvalidInput("SVM seed set is empty");
    const Eigen::Index dim = seed.front().features.size();
    bool has_pos = false;
    bool has_neg = false;
    for (const auto &s : seed)
    {
        require_signed(s);
        if (s.features.size() != dim || !s.features.allFinite())
            throw InvalidInput("SVM seed features must be finite with a common dimension");
        (s.label > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw InvalidInput("SVM seed set must contain both classes");

    const double lambda = 1.0 / c;
    const double n = static_cast<double>(seed.size());
    // eta * lambda must stay below 2 for the regularizer step to contract.
    const double eta0 = std::min(1.0, c);
    SvmModel model{RealVector::Zero(dim), 0.0, c};
    SvmModel best = model;
    double best_obj = svm_objective(model, seed);

    for (int t = 1; t <= options.iterations; ++t)
    {
        const double eta = eta0 / std::sqrt(static_cast<double>(t));
        RealVector gw = lambda * model.w;
        double gb = 0.0;
        for (const auto &s : seed)
        {
            if (s.label * model.decision(s.features) < 1.0)
            {
                gw -= (s.label / n) * s.features;
                gb -= s.label / n;
            }
        }
        model.w -= eta * gw;
        model.b -= eta * gb;

        const double obj = svm_objective(model, seed);
        if (obj < best_obj)
        {
            best_obj = obj;
            best = model;
        }
    }
    return best;
}

SvmModel svm_update(const SvmModel &model, const Sample &sample, double step)
{
    require_signed(sample);
    if (sample.features.size() != model.feature_dim())
        throw InvalidInput("sample dimension does not match the SVM");
    SvmModel next = model;
    const double y = sample.label;
    if (y * model.decision(sample.features) < 1.0)
    {
        next.w = model.w - step * (model.w / model.c - y * sample.features);
        next.b = model.b + step * y;
    }
    else
    {
        next.w = model.w - step * (model.w / model.c);
    }
    return next;
}

double svm_step(int t, double step0, double tau)
{
    return step0 / (1.0 + static_cast<double>(t) / tau);
}

RealVector noisy_receive(const RealVector &features, double snr_linear, RngStream &rng)
{
    if (!(snr_linear > 0.0))
        throw InvalidInput("SNR must be positive");
    if (std::isinf(snr_linear))
        return features;
    const double sd = std::sqrt(1.0 / snr_linear);
    RealVector out = features;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        out(i) += sd * rng.normal();
    return out;
}

double evaluate(const SvmModel &model, std::span<const Sample> test)
{
    if (test.empty())
        throw InvalidInput("empty test set");
    std::size_t correct = 0;
    for (const auto &s : test)
        correct += model.predict(s.features) == s.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

// ------------------------------------------------------ federated models ----

Eigen::Index Architecture::parameter_count() const
{
    if (hidden == 0)
        return static_cast<Eigen::Index>(outputs()) * (input_dim + 1);
    return static_cast<Eigen::Index>(hidden) * (input_dim + 1) + static_cast<Eigen::Index>(outputs()) * (hidden + 1);
}

FedModel FedModel::zeros(const Architecture &arch)
{
    if (arch.input_dim < 1 || arch.hidden < 0 || arch.num_classes < 2)
        throw InvalidInput("invalid architecture");
    return FedModel{arch, RealVector::Zero(arch.parameter_count())};
}

FedModel FedModel::random(const Architecture &arch, RngStream &rng, double scale)
{
    FedModel m = zeros(arch);
    for (Eigen::Index i = 0; i < m.parameters.size(); ++i)
        m.parameters(i) = scale * rng.normal();
    return m;
}

int FedModel::predict(const RealVector &x) const
{
    const Forward f = forward(*this, x);
    if (f.logits.size() == 1)
        return f.logits(0) >= 0.0 ? 1 : 0;
    Eigen::Index best = 0;
    f.logits.maxCoeff(&best);
    return static_cast<int>(best);
}

double fed_loss(const FedModel &model, std::span<const Sample> batch)
{
    check_model(model);
    if (batch.empty())
        throw InvalidInput("empty batch");
    double total = 0.0;
    RealVector dz;
    for (const auto &s : batch)
    {
        check_sample(model, s);
        total += logit_gradient(forward(model, s.features).logits, s.label, dz);
    }
    return total / static_cast<double>(batch.size());
}

RealVector fed_local_gradient(const FedModel &model, std::span<const Sample> batch)
{
    check_model(model);
    if (batch.empty())
        throw InvalidInput("empty batch");

    const Architecture &a = model.arch;
    const Layers layers{a, model.parameters.data()};
    RealVector grad = RealVector::Zero(model.parameters.size());
    const int rows1 = a.hidden > 0 ? a.hidden : a.outputs();
    MatMap gw1(grad.data(), rows1, a.input_dim);
    Eigen::Map<RealVector> gb1(grad.data() + static_cast<std::ptrdiff_t>(rows1) * a.input_dim, rows1);

    RealVector dz;
    for (const auto &s : batch)
    {
        check_sample(model, s);
        const Forward f = forward(model, s.features);
        logit_gradient(f.logits, s.label, dz);
        if (a.hidden == 0)
        {
            gw1.noalias() += dz * s.features.transpose();
            gb1 += dz;
            continue;
        }
        const std::ptrdiff_t off = layers.second_offset();
        MatMap gw2(grad.data() + off, a.outputs(), a.hidden);
        Eigen::Map<RealVector> gb2(grad.data() + off + static_cast<std::ptrdiff_t>(a.outputs()) * a.hidden,
                                   a.outputs());
        gw2.noalias() += dz * f.hidden.transpose();
        gb2 += dz;
        const RealVector da = (layers.w2().transpose() * dz).cwiseProduct(
            (1.0 - f.hidden.array().square()).matrix());
        gw1.noalias() += da * s.features.transpose();
        gb1 += da;
    }
    grad /= static_cast<double>(batch.size());
    return grad;
}

FedModel fed_apply(const FedModel &model, const RealVector &aggregate, double lr)
{
    if (aggregate.size() != model.parameters.size())
        throw InvalidInput("aggregate has " + std::to_string(aggregate.size()) + " entries, model has " +
                           std::to_string(model.parameters.size()));
    return FedModel{model.arch, model.parameters - lr * aggregate};
}

double evaluate(const FedModel &model, std::span<const Sample> test)
{
    if (test.empty())
        throw InvalidInput("empty test set");
    std::size_t correct = 0;
    for (const auto &s : test)
        correct += model.predict(s.features) == s.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

// ------------------------------------------------------------- datasets ----

Dataset gaussian_mixture(const GaussianMixtureSpec &spec)
{
    if (spec.means.empty())
        throw InvalidInput("mixture needs at least one mean");
    const Eigen::Index dim = spec.means.front().size();
    RngStream rng(spec.seed, 0x6d6978);
    Dataset out;
    out.reserve(spec.count);
    for (std::size_t n = 0; n < spec.count; ++n)
    {
        const auto cls = static_cast<int>(n % spec.means.size());
        RealVector x = spec.means[static_cast<std::size_t>(cls)];
        for (Eigen::Index i = 0; i < dim; ++i)
            x(i) += spec.scale * rng.normal();
        out.push_back(Sample{std::move(x), cls, -1});
    }
    std::shuffle(out.begin(), out.end(), rng.engine());
    return out;
}

std::vector<RealVector> two_gaussian_means(int dim, double offset)
{
    RealVector e = RealVector::Unit(dim, 0) * offset;
    return {-e, e};
}

Dataset to_signed_labels(Dataset data)
{
    for (auto &s : data)
        s.label = s.label == 1 ? 1 : -1;
    return data;
}

Standardizer Standardizer::fit(std::span<const Sample> data)
{
    if (data.empty())
        throw InvalidInput("cannot standardize an empty dataset");
    const Eigen::Index dim = data.front().features.size();
    RealVector mean = RealVector::Zero(dim);
    for (const auto &s : data)
        mean += s.features;
    mean /= static_cast<double>(data.size());
    RealVector var = RealVector::Zero(dim);
    for (const auto &s : data)
        var += (s.features - mean).array().square().matrix();
    var /= static_cast<double>(data.size());
    Standardizer st;
    st.mean_ = std::move(mean);
    // Constant coordinates are centred but left unscaled.
    st.inv_sd_ = var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 1.0; });
    return st;
}

RealVector Standardizer::apply(const RealVector &x) const
{
    return (x - mean_).cwiseProduct(inv_sd_);
}

void Standardizer::apply_inplace(Dataset &data) const
{
    for (auto &s : data)
        s.features = apply(s.features);
}

namespace
{

std::uint32_t read_be32(std::ifstream &in, const std::filesystem::path &path)
{
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char *>(b), 4))
        throw FormatError(path.string() + ": truncated IDX header");
    return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::vector<unsigned char> read_payload(std::ifstream &in, std::size_t n, const std::filesystem::path &path)
{
    std::vector<unsigned char> buf(n);
    if (n > 0 && !in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(n)))
        throw FormatError(path.string() + ": truncated IDX payload");
    return buf;
}

} // namespace

std::vector<RealVector> read_idx_images(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    if (read_be32(in, path) != 0x00000803)
        throw FormatError(path.string() + ": not an IDX image file");
    const std::uint32_t count = read_be32(in, path);
    const std::uint32_t rows = read_be32(in, path);
    const std::uint32_t cols = read_be32(in, path);
    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    const auto raw = read_payload(in, pixels * count, path);
    std::vector<RealVector> out(count, RealVector(static_cast<Eigen::Index>(pixels)));
    for (std::size_t n = 0; n < count; ++n)
        for (std::size_t p = 0; p < pixels; ++p)
            out[n](static_cast<Eigen::Index>(p)) = raw[n * pixels + p] / 255.0;
    return out;
}

std::vector<int> read_idx_labels(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    if (read_be32(in, path) != 0x00000801)
        throw FormatError(path.string() + ": not an IDX label file");
    const std::uint32_t count = read_be32(in, path);
    const auto raw = read_payload(in, count, path);
    return std::vector<int>(raw.begin(), raw.end());
}

Dataset load_mnist(const std::filesystem::path &images, const std::filesystem::path &labels,
                   std::optional<std::pair<int, int>> class_pair)
{
    auto x = read_idx_images(images);
    const auto y = read_idx_labels(labels);
    if (x.size() != y.size())
        throw FormatError("image and label counts differ");
    Dataset out;
    for (std::size_t n = 0; n < x.size(); ++n)
    {
        int label = y[n];
        if (class_pair)
        {
            if (label == class_pair->first)
                label = 0;
            else if (label == class_pair->second)
                label = 1;
            else
                continue;
        }
        out.push_back(Sample{std::move(x[n]), label, -1});
    }
    return out;
}

} // namespace edgeflow::learners
