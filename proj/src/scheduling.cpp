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

#include "edgeflow/scheduling.hpp"

#include "edgeflow/errors.hpp"

#include <cmath>
#include <string>

namespace edgeflow::scheduling
{

std::string_view to_string(Policy p)
{
    switch (p)
    {
    case Policy::importance:
        return "importance";
    case Policy::channel_aware:
        return "channel_aware";
    case Policy::data_aware:
        return "data_aware";
    }
    return "unknown";
}

Policy parse_policy(std::string_view name)
{
    if (name == "importance")
        return Policy::importance;
    if (name == "channel_aware")
        return Policy::channel_aware;
    if (name == "data_aware")
        return Policy::data_aware;
    throw InvalidInput("unknown scheduling policy '" + std::string(name) + "'");
}

Importance dii(double snr_linear, std::span<const double> uncertainties)
{
    if (!(snr_linear > 0.0))
        throw InvalidInput("SNR must be positive");
    if (uncertainties.empty())
        throw InvalidInput("device reported no samples");
    std::size_t best = 0;
    for (std::size_t i = 1; i < uncertainties.size(); ++i)
        if (uncertainties[i] > uncertainties[best])
            best = i;
    return Importance{-1.0 / snr_linear + uncertainties[best], best};
}

SchedulingDecision select_device(std::span<const DeviceReport> reports, Policy policy)
{
    if (reports.empty())
        throw InvalidInput("no device reports to schedule from");

    SchedulingDecision d;
    d.policy = policy;
    d.dii_values.reserve(reports.size());
    for (const auto &r : reports)
    {
        if (!(r.snr_linear > 0.0))
            throw InvalidInput("device " + std::to_string(r.device_id) + " reported a non-positive SNR");
        d.dii_values.push_back(-1.0 / r.snr_linear + r.max_uncertainty);
    }

    const auto metric = [&](std::size_t i) {
        switch (policy)
        {
        case Policy::importance:
            return d.dii_values[i];
        case Policy::channel_aware:
            return reports[i].snr_linear;
        case Policy::data_aware:
            return reports[i].max_uncertainty;
        }
        return d.dii_values[i];
    };

    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
    {
        const double mi = metric(i);
        const double mb = metric(best);
        if (mi > mb || (mi == mb && reports[i].device_id < reports[best].device_id))
            best = i;
    }
    d.selected_report = best;
    d.selected_device = reports[best].device_id;
    return d;
}

double distance_uncertainty(const learners::SvmModel &model, const RealVector &x)
{
    const double norm = model.w.norm();
    if (!(norm > 0.0))
        throw ModelDegenerate("SVM weight vector is zero; decision boundary undefined");
    if (x.size() != model.w.size())
        throw InvalidInput("feature dimension does not match the SVM");
    return -std::abs(model.decision(x)) / norm;
}

} // namespace edgeflow::scheduling
