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
#include "edgeflow/config.hpp"
#include "edgeflow/learners.hpp"
#include "edgeflow/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edgeflow::harness
{

// Module tags for RngStream::derive; each experiment stage draws from its own
// (seed, tag, device, round) streams.
enum class StreamTag : std::uint64_t
{
    data = 1,
    test_data,
    init,
    batch,
    channel,
    noise,
    snr,
    pick,
    receive,
    codebook,
    seed_set,
    sweep_channel,
    sweep_noise,
    sweep_payload,
    sweep_beamformer
};

RngStream stream(const ExperimentConfig &config, StreamTag tag, std::uint64_t device, std::uint64_t round);

struct FederatedData
{
    std::vector<learners::Dataset> devices;
    learners::Dataset test;
    learners::Architecture arch;
};

FederatedData make_federated_data(const ExperimentConfig &config);
learners::FedModel initial_model(const ExperimentConfig &config, const learners::Architecture &arch);

/// Gradient a device computes in one round (whole local set or a sampled minibatch).
RealVector device_gradient(const ExperimentConfig &config, const learners::FedModel &model,
                           const learners::Dataset &local, int device, int round);

struct RunOptions
{
    bool record_parameters = false;
};

struct RunResult
{
    std::vector<RoundMetrics> metrics;
    std::vector<RealVector> parameters; // model after each round, when recorded
    bool early_stopped = false;
    std::string stop_reason;
};

/// Codebooks for hierarchical quantization: the configured bundle file, or a
/// bundle calibrated from a short unquantized pilot run.
codebooks::CodebookBundle codebooks_for(const ExperimentConfig &config);
codebooks::CodebookBundle build_pilot_codebooks(const ExperimentConfig &config);

RunResult run_federated_quantized(const ExperimentConfig &config, const RunOptions &options = {});
RunResult run_federated_aircomp(const ExperimentConfig &config, const RunOptions &options = {});
RunResult run_centralized_scheduling(const ExperimentConfig &config, const RunOptions &options = {});

struct SweepRow
{
    int devices = 0;
    int m_r = 0;
    int m_t = 0;
    int streams = 0;
    double noise_variance = 0.0;
    aircomp::Mode mode = aircomp::Mode::aligned;
    std::string beamformer;
    int trials = 0;
    double mean_mse = 0.0;
    double mean_tx_power = 0.0;
};

inline constexpr const char *kSweepHeader =
    "devices,m_r,m_t,streams,noise_variance,snr_db,mode,beamformer,trials,mean_mse,mean_tx_power";

std::vector<SweepRow> run_aircomp_sweep(const ExperimentConfig &config);
std::string format_sweep(const std::vector<SweepRow> &rows);

/// Runs whatever the configuration describes and writes its output file
/// (metrics CSV, sweep CSV or codebook bundle). Returns the run result for
/// round-based experiments.
RunResult execute(const ExperimentConfig &config);

} // namespace edgeflow::harness
