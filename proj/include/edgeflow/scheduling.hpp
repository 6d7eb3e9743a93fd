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

#include "edgeflow/learners.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace edgeflow::scheduling
{

enum class Policy
{
    importance,    // argmax_k  -1/SNR_k + max_n U(x_kn)
    channel_aware, // argmax_k  SNR_k
    data_aware     // argmax_k  max_n U(x_kn)
};

std::string_view to_string(Policy p);
Policy parse_policy(std::string_view name);

struct DeviceReport
{
    int device_id = 0;
    double snr_linear = 1.0;
    double max_uncertainty = 0.0;
    std::size_t best_sample_index = 0;
};

struct SchedulingDecision
{
    int selected_device = 0;
    std::size_t selected_report = 0; // position in the report list
    std::vector<double> dii_values;  // data importance indicator per report
    Policy policy = Policy::importance;
};

struct Importance
{
    double value = 0.0;
    std::size_t best_index = 0;
};

/// I = -1/snr + max(uncertainties); best_index is the lowest argmax.
Importance dii(double snr_linear, std::span<const double> uncertainties);

/// Ties resolve to the lowest device id.
SchedulingDecision select_device(std::span<const DeviceReport> reports, Policy policy);

/// U(x) = -|w x + b| / |w|; zero on the boundary, decreasing with distance.
double distance_uncertainty(const learners::SvmModel &model, const RealVector &x);

} // namespace edgeflow::scheduling
