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

#include "edgeflow/aircomp.hpp"
#include "edgeflow/channel.hpp"
#include "edgeflow/scheduling.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edgeflow::harness
{

inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind
{
    federated_quantized,
    federated_aircomp,
    centralized_scheduling,
    aircomp_sweep,
    codebook_build
};

enum class QuantPolicy
{
    hierarchical,
    signsgd,
    unquantized
};

enum class SampleMode
{
    max_over_pool, // each device reports its most uncertain sample
    random_sample  // each device reports one random sample
};

std::string_view to_string(ExperimentKind k);
std::string_view to_string(QuantPolicy p);

struct ChannelParams
{
    double mean_snr_db = 15.0;
    bool fading = true;
    bool resample_snr = true; // fresh SNR draw every round, else fixed per device
    int m_r = 4;
    int m_t = 3;
    int streams = 2;
    double noise_variance = 0.0;
    aircomp::Mode mode = aircomp::Mode::aligned;
    std::optional<double> power_cap;
};

struct QuantParams
{
    QuantPolicy policy = QuantPolicy::hierarchical;
    int blocks = 4; // M
    int b_rho = 4;
    int b_s = 4;
    int b_h = 8;
    std::optional<std::filesystem::path> codebook; // prebuilt bundle, else pilot-calibrated
    int pilot_samples = 500;
    double sign_lr = 0.01;     // server step applied to the mean sign vector
    int packing_iters = 2000;
    int lloyd_iters = 100;
};

struct SchedulingParams
{
    scheduling::Policy policy = scheduling::Policy::importance;
    SampleMode sample_mode = SampleMode::max_over_pool;
    int pool_size = 50;
    int seed_samples = 10;
    double svm_c = 10.0;
    double step0 = 0.1;
    double tau = 50.0;
};

struct DatasetSpec
{
    std::string kind = "synthetic"; // synthetic | mnist
    int dim = 64;
    double offset = 1.0; // class means at -offset e_1 and +offset e_1
    double scale = 1.0;
    int train_per_device = 50;
    int test_count = 1000;
    std::optional<std::filesystem::path> mnist_images;
    std::optional<std::filesystem::path> mnist_labels;
    std::optional<std::pair<int, int>> classes; // binary MNIST subset
};

struct LearnerParams
{
    std::string architecture = "logistic"; // logistic | mlp
    int hidden = 0;
    double lr = 0.1;
    int batch_size = 0; // per device and round; 0 uses the whole local set
    double init_scale = 0.01;
    DatasetSpec dataset;
};

struct SweepParams
{
    std::vector<int> devices{4};
    std::vector<int> m_r{4};
    std::vector<int> m_t{3};
    std::vector<int> streams{2};
    std::vector<double> noise_variance{0.0, 0.1, 1.0};
    std::vector<aircomp::Mode> modes{aircomp::Mode::raw, aircomp::Mode::aligned};
    std::vector<std::string> beamformers{"centroid", "random"};
    int trials = 1000;
};

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::federated_quantized;
    int devices = 10; // K
    int rounds = 100; // T
    std::uint64_t seed = 1;
    std::optional<std::filesystem::path> output;
    ChannelParams channel;
    QuantParams quantization;
    SchedulingParams scheduling;
    LearnerParams learner;
    SweepParams sweep;
};

/// Parses a JSON configuration; unknown keys, type errors and missing files
/// raise ConfigError naming the offending field.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir = {});
ExperimentConfig load_config(const std::filesystem::path &path);

/// Canonical JSON rendering of a configuration (round-trips through parse_config).
std::string dump_config(const ExperimentConfig &config);

} // namespace edgeflow::harness
