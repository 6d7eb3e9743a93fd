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
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace edgeflow::learners
{

/// A training or test example. `label` is a class id (0..C-1) for the
/// federated classifiers and -1/+1 for the SVM.
struct Sample
{
    RealVector features;
    int label = 0;
    int origin_device = -1;
};

using Dataset = std::vector<Sample>;

// ---------------------------------------------------------------- SVM ----

struct SvmModel
{
    RealVector w;
    double b = 0.0;
    double c = 10.0; // soft-margin penalty; regularizer weight is 1 / c

    Eigen::Index feature_dim() const noexcept { return w.size(); }
    double decision(const RealVector &x) const { return w.dot(x) + b; }
    int predict(const RealVector &x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

struct SvmInitOptions
{
    int iterations = 2000;
};

/// Full-batch subgradient descent with a 1/sqrt(t) step on
/// |w|^2 / (2c) + mean_n max(0, 1 - y_n (w x_n + b)); returns the best iterate.
SvmModel svm_init(std::span<const Sample> seed, double c, const SvmInitOptions &options = {});

/// Soft-margin objective value used by svm_init.
double svm_objective(const SvmModel &model, std::span<const Sample> data);

/// One single-sample subgradient step.
SvmModel svm_update(const SvmModel &model, const Sample &sample, double step);

/// step_t = step0 / (1 + t / tau).
double svm_step(int t, double step0 = 0.1, double tau = 50.0);

/// Received features under analog transmission: x + N(0, 1/snr) per coordinate.
RealVector noisy_receive(const RealVector &features, double snr_linear, RngStream &rng);

double evaluate(const SvmModel &model, std::span<const Sample> test);

// ------------------------------------------------------ federated models ----

/// Logistic regression (hidden = 0) or a one-hidden-layer tanh MLP. Two
/// classes use a single sigmoid output, more classes a softmax.
struct Architecture
{
    int input_dim = 1;
    int hidden = 0;
    int num_classes = 2;

    int outputs() const noexcept { return num_classes == 2 ? 1 : num_classes; }
    Eigen::Index parameter_count() const;
    bool operator==(const Architecture &) const = default;
};

struct FedModel
{
    Architecture arch;
    RealVector parameters;

    static FedModel zeros(const Architecture &arch);
    /// Gaussian initialization with standard deviation `scale`.
    static FedModel random(const Architecture &arch, RngStream &rng, double scale = 0.1);

    int predict(const RealVector &x) const;
};

/// Mean cross-entropy over the batch.
double fed_loss(const FedModel &model, std::span<const Sample> batch);
/// Gradient of fed_loss with respect to the flat parameter vector.
RealVector fed_local_gradient(const FedModel &model, std::span<const Sample> batch);
/// parameters <- parameters - lr * aggregate.
FedModel fed_apply(const FedModel &model, const RealVector &aggregate, double lr);

double evaluate(const FedModel &model, std::span<const Sample> test);

// ------------------------------------------------------------- datasets ----

struct GaussianMixtureSpec
{
    std::vector<RealVector> means; // one per class
    double scale = 1.0;            // isotropic standard deviation
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

/// Balanced classes in shuffled order; labels are class ids.
Dataset gaussian_mixture(const GaussianMixtureSpec &spec);

/// Means at -offset e_1 (class 0) and +offset e_1 (class 1).
std::vector<RealVector> two_gaussian_means(int dim, double offset);

/// Class 1 -> +1, anything else -> -1.
Dataset to_signed_labels(Dataset data);

class Standardizer
{
  public:
    static Standardizer fit(std::span<const Sample> data);
    RealVector apply(const RealVector &x) const;
    void apply_inplace(Dataset &data) const;

  private:
    RealVector mean_;
    RealVector inv_sd_;
};

/// IDX image file (magic 0x00000803); pixels scaled to [0, 1].
std::vector<RealVector> read_idx_images(const std::filesystem::path &path);
/// IDX label file (magic 0x00000801).
std::vector<int> read_idx_labels(const std::filesystem::path &path);
/// Joins images and labels; with a class pair keeps only those classes and relabels them 0/1.
Dataset load_mnist(const std::filesystem::path &images, const std::filesystem::path &labels,
                   std::optional<std::pair<int, int>> class_pair = std::nullopt);

} // namespace edgeflow::learners
