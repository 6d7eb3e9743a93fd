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

#include "edgeflow/metrics.hpp"

#include "edgeflow/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace edgeflow::harness
{

namespace
{

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T> std::string optional_field(const std::optional<T> &v)
{
    if (!v)
        return {};
    if constexpr (std::is_floating_point_v<T>)
        return number(*v);
    else
        return std::to_string(*v);
}

std::vector<std::string> split(const std::string &line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

template <typename T> T parse_cell(const std::string &cell, std::size_t line, const char *column)
{
    T value{};
    const char *end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc() || ptr != end)
    {
        // libstdc++ from_chars handles doubles; strtod covers the rest.
        if constexpr (std::is_floating_point_v<T>)
        {
            char *e = nullptr;
            value = std::strtod(cell.c_str(), &e);
            if (e == cell.c_str() + cell.size() && !cell.empty())
                return value;
        }
        throw FormatError("metrics line " + std::to_string(line) + ": bad value '" + cell + "' in column " + column);
    }
    return value;
}

template <typename T>
std::optional<T> parse_optional(const std::string &cell, std::size_t line, const char *column)
{
    if (cell.empty())
        return std::nullopt;
    return parse_cell<T>(cell, line, column);
}

} // namespace

std::string format_metrics(const std::vector<RoundMetrics> &metrics)
{
    std::string out = kMetricsHeader;
    out += '\n';
    for (const auto &m : metrics)
    {
        out += std::to_string(m.round) + ',' + number(m.test_accuracy) + ',' + optional_field(m.cumulative_bits_sent) +
               ',' + optional_field(m.bits_per_coefficient) + ',' + optional_field(m.aircomp_mse) + ',' +
               optional_field(m.selected_device) + ',' + number(m.wall_time_ms) + '\n';
    }
    return out;
}

void write_metrics(const std::vector<RoundMetrics> &metrics, const std::filesystem::path &path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << format_metrics(metrics);
    out.flush();
    if (!out)
        throw Error("failed writing " + path.string());
}

std::vector<RoundMetrics> parse_metrics(const std::string &csv)
{
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader)
        throw FormatError("metrics header mismatch: expected '" + std::string(kMetricsHeader) + "'");
    std::vector<RoundMetrics> out;
    std::size_t lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        const auto cells = split(line);
        if (cells.size() != 7)
            throw FormatError("metrics line " + std::to_string(lineno) + ": expected 7 columns, got " +
                              std::to_string(cells.size()));
        RoundMetrics m;
        m.round = parse_cell<int>(cells[0], lineno, "round");
        m.test_accuracy = parse_cell<double>(cells[1], lineno, "test_accuracy");
        m.cumulative_bits_sent = parse_optional<std::uint64_t>(cells[2], lineno, "cum_bits");
        m.bits_per_coefficient = parse_optional<double>(cells[3], lineno, "bits_per_coeff");
        m.aircomp_mse = parse_optional<double>(cells[4], lineno, "aircomp_mse");
        m.selected_device = parse_optional<int>(cells[5], lineno, "selected_device");
        m.wall_time_ms = parse_cell<double>(cells[6], lineno, "wall_time_ms");
        out.push_back(m);
    }
    return out;
}

std::vector<RoundMetrics> read_metrics(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_metrics(buf.str());
}

} // namespace edgeflow::harness
