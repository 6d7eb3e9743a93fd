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

#include "edgeflow/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string_view>

namespace edgeflow
{

spdlog::logger &log()
{
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("edgeflow");
        l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
        spdlog::level::level_enum level = spdlog::level::info;
        if (const char *env = std::getenv("EDGEFLOW_LOG"))
        {
            const std::string_view v(env);
            if (v == "error")
                level = spdlog::level::err;
            else if (v == "debug")
                level = spdlog::level::debug;
        }
        l->set_level(level);
        return l;
    }();
    return *logger;
}

} // namespace edgeflow
