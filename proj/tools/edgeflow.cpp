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
#include "edgeflow/config.hpp"
#include "edgeflow/errors.hpp"
#include "edgeflow/harness.hpp"
#include "edgeflow/log.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

namespace
{

using namespace edgeflow;

struct BitWidths
{
    int b_rho = 4;
    int b_s = 4;
    int b_h = 8;
};

BitWidths parse_bits(const std::string &text)
{
    BitWidths b;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d:%d:%d%c", &b.b_rho, &b.b_s, &b.b_h, &tail) != 3)
        throw ConfigError("--bits expects B_rho:B_s:B_h, got '" + text + "'");
    return b;
}

codebooks::CodebookBundle untrained_bundle(int dim, int blocks, const BitWidths &bits, double norm_max,
                                           std::uint64_t seed)
{
    if (dim < 1 || blocks < 1 || blocks > dim)
        throw ConfigError("--blocks must lie in [1, --dim]");
    if (!(norm_max > 0.0))
        throw ConfigError("--norm-max must be positive");
    codebooks::CodebookBundle b;
    b.m = blocks;
    b.l = (dim + blocks - 1) / blocks;
    b.norm_cb = codebooks::uniform_scalar_codebook(0.0, norm_max, bits.b_rho);
    RngStream pack(seed, 0);
    if (b.l >= 2)
        b.block_cb = codebooks::line_packing(b.l, bits.b_s, pack);
    else
        b.block_cb = codebooks::GrassmannCodebook{RealMatrix::Ones(1, Eigen::Index{1} << bits.b_s), bits.b_s,
                                                  codebooks::Kind::isotropic};
    RngStream lloyd(seed, 1);
    const std::size_t count = std::size_t{2} << bits.b_h;
    const auto training = codebooks::abs_gaussian_directions(blocks, std::max<std::size_t>(count, 500), lloyd);
    b.hinge_cb = codebooks::lloyd_codebook(training, bits.b_h, lloyd);
    return b;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"edgeflow: communication-efficient edge learning simulator"};
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::uint64_t> run_seed;
    std::string run_out;
    auto *run = app.add_subcommand("run", "Run the experiment described by a configuration file");
    run->add_option("--config", run_config, "Configuration JSON")->required();
    run->add_option("--seed", run_seed, "Override the master seed");
    run->add_option("--out", run_out, "Override the output path");

    std::string sweep_config;
    std::string sweep_out;
    auto *sweep = app.add_subcommand("sweep", "Run an AirComp MSE sweep over a parameter grid");
    sweep->add_option("--config", sweep_config, "Sweep configuration JSON")->required();
    sweep->add_option("--out", sweep_out, "Override the output CSV path");

    auto *codebook = app.add_subcommand("codebook", "Codebook utilities");
    codebook->require_subcommand(1);
    int cb_dim = 0;
    int cb_blocks = 4;
    std::string cb_bits = "4:4:8";
    std::string cb_kind = "hierarchical";
    std::uint64_t cb_seed = 1;
    std::string cb_out;
    std::string cb_train;
    double cb_norm_max = 1.0;
    auto *build = codebook->add_subcommand("build", "Build a hierarchical codebook bundle");
    build->add_option("--dim", cb_dim, "Gradient dimension");
    build->add_option("--blocks", cb_blocks, "Number of blocks M");
    build->add_option("--bits", cb_bits, "Bit widths B_rho:B_s:B_h");
    build->add_option("--kind", cb_kind, "Codebook family")->check(CLI::IsMember({"hierarchical"}));
    build->add_option("--seed", cb_seed, "Seed for packing and Lloyd initialization");
    build->add_option("--out", cb_out, "Output bundle path")->required();
    build->add_option("--train-from", cb_train, "Calibrate from a pilot run of this federated configuration");
    build->add_option("--norm-max", cb_norm_max, "Upper end of the norm codebook without --train-from");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run->parsed())
        {
            auto config = harness::load_config(run_config);
            if (run_seed)
                config.seed = *run_seed;
            if (!run_out.empty())
                config.output = run_out;
            const auto result = harness::execute(config);
            if (result.early_stopped)
                log().info("stopped early: {}", result.stop_reason);
        }
        else if (sweep->parsed())
        {
            auto config = harness::load_config(sweep_config);
            if (config.kind != harness::ExperimentKind::aircomp_sweep)
                throw ConfigError("sweep needs a configuration with experiment 'aircomp_sweep'");
            if (!sweep_out.empty())
                config.output = sweep_out;
            harness::execute(config);
        }
        else if (build->parsed())
        {
            const BitWidths bits = parse_bits(cb_bits);
            codebooks::CodebookBundle bundle;
            if (!cb_train.empty())
            {
                auto config = harness::load_config(cb_train);
                config.seed = cb_seed;
                config.quantization.blocks = cb_blocks;
                config.quantization.b_rho = bits.b_rho;
                config.quantization.b_s = bits.b_s;
                config.quantization.b_h = bits.b_h;
                bundle = harness::build_pilot_codebooks(config);
                if (cb_dim != 0 && (cb_dim + cb_blocks - 1) / cb_blocks != bundle.l)
                    throw ConfigError("--dim " + std::to_string(cb_dim) +
                                      " disagrees with the model dimension of the --train-from configuration");
            }
            else
            {
                if (cb_dim < 1)
                    throw ConfigError("codebook build needs --dim or --train-from");
                bundle = untrained_bundle(cb_dim, cb_blocks, bits, cb_norm_max, cb_seed);
            }
            codebooks::save_bundle(bundle, cb_out);
            log().info("wrote codebook bundle M={} L={} to {}", bundle.m, bundle.l, cb_out);
        }
    }
    catch (const ConfigError &e)
    {
        log().error("configuration error: {}", e.what());
        return 2;
    }
    catch (const std::exception &e)
    {
        log().error("{}", e.what());
        return 3;
    }
    return 0;
}
