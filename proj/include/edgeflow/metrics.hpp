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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace edgeflow::harness
{

/// One row of the per-round metrics file.
struct RoundMetrics
{
    int round = 0;
    double test_accuracy = 0.0;
    std::optional<std::uint64_t> cumulative_bits_sent;
    std::optional<double> bits_per_coefficient;
    std::optional<double> aircomp_mse;
    std::optional<int> selected_device;
    double wall_time_ms = 0.0;

    bool operator==(const RoundMetrics &) const = default;
};

inline constexpr const char *kMetricsHeader =
    "round,test_accuracy,cum_bits,bits_per_coeff,aircomp_mse,selected_device,wall_time_ms";

/// CSV with the fixed header above; doubles printed with 17 significant
/// digits, absent values left empty.
std::string format_metrics(const std::vector<RoundMetrics> &metrics);
void write_metrics(const std::vector<RoundMetrics> &metrics, const std::filesystem::path &path);

std::vector<RoundMetrics> parse_metrics(const std::string &csv);
std::vector<RoundMetrics> read_metrics(const std::filesystem::path &path);

} // namespace edgeflow::harness
