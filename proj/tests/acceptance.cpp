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

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include "support.hpp"

#include "edgeflow/aircomp.hpp"
#include "edgeflow/codebooks.hpp"
#include "edgeflow/errors.hpp"
#include "edgeflow/gradquant.hpp"
#include "edgeflow/harness.hpp"
#include "edgeflow/learners.hpp"
#include "edgeflow/linalg.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace edgeflow;
using edgeflow::testing::naive_adjoint;
using edgeflow::testing::naive_dpf2;
using edgeflow::testing::naive_fro;
using edgeflow::testing::naive_mul;
using edgeflow::testing::naive_objective;
using edgeflow::testing::random_complex;
using edgeflow::testing::random_stiefel;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *pattern, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

std::vector<ComplexMatrix> effective_subspaces(const std::vector<channel::MimoChannel> &chans, int n)
{
    std::vector<ComplexMatrix> us;
    for (const auto &ch : chans)
        us.push_back(aircomp::zf_precoder(ch, n).effective_u.basis());
    return us;
}

// 1. Closed-form beamformer against randomized Stiefel search.
Outcome beamformer_optimality()
{
    RngStream rng(101, 0);
    int wins = 0;
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (int inst = 0; inst < 50; ++inst)
    {
        std::vector<channel::MimoChannel> chans;
        for (int k = 0; k < 3; ++k)
            chans.push_back(channel::sample_rayleigh_mimo(4, 3, rng, k));
        const auto us = effective_subspaces(chans, 2);
        const auto bf = aircomp::design_beamformer(chans, 2);
        const double closed = naive_objective(us, bf.A);
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 10000; ++c)
            best = std::min(best, naive_objective(us, random_stiefel(4, 2, rng)));
        worst_gap = std::max(worst_gap, closed - best);
        wins += closed <= best + 1e-6 ? 1 : 0;
    }
    return {wins == 50, fmt("%d/50 instances, max(closed - search) = %.3e", wins, worst_gap)};
}

// 2. Projection-distance and objective identities.
Outcome distance_identity()
{
    RngStream rng(102, 0);
    double worst_pair = 0.0;
    for (int t = 0; t < 1000; ++t)
    {
        const int m = 2 + static_cast<int>(rng.index(5));
        const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(m)));
        const ComplexMatrix u = random_stiefel(m, n, rng);
        const ComplexMatrix a = random_stiefel(m, n, rng);
        const double d = linalg::proj_dist_fro(linalg::Subspace(u), linalg::Subspace(a));
        const double cross = naive_fro(naive_mul(naive_adjoint(a), u));
        worst_pair = std::max(worst_pair, std::abs(d * d - 2.0 * (n - cross * cross)));
    }
    double worst_obj = 0.0;
    for (int t = 0; t < 200; ++t)
    {
        const int k = 1 + static_cast<int>(rng.index(6));
        std::vector<linalg::Subspace> subs;
        for (int i = 0; i < k; ++i)
            subs.emplace_back(random_stiefel(4, 2, rng));
        const auto c = linalg::grassmann_centroid(subs, 2);
        const double objective = linalg::centroid_objective(subs, c.centroid);
        worst_obj = std::max(worst_obj, std::abs(objective - 2.0 * (2.0 * k - c.eigenvalues(0) - c.eigenvalues(1))));
    }
    return {worst_pair < 1e-10 && worst_obj < 1e-8,
            fmt("max pair error %.3e (tol 1e-10), max objective error %.3e (tol 1e-8)", worst_pair, worst_obj)};
}

// 3. Aligned AirComp exactness and noise law.
Outcome aircomp_exactness()
{
    RngStream rng(103, 0);
    double worst_mse = 0.0;
    for (int k : {1, 2, 5, 10})
        for (int trial = 0; trial < 100; ++trial)
        {
            std::vector<channel::MimoChannel> chans;
            std::vector<aircomp::DeviceTransmission> devs;
            for (int i = 0; i < k; ++i)
            {
                chans.push_back(channel::sample_rayleigh_mimo(4, 3, rng, i));
                ComplexVector x(2);
                x << rng.complex_normal(), rng.complex_normal();
                devs.push_back({chans.back(), aircomp::zf_precoder(chans.back(), 2).precoder, x});
            }
            const auto bf = aircomp::design_beamformer(chans, 2);
            worst_mse = std::max(worst_mse, aircomp::transmit_round(bf, devs, {aircomp::Mode::aligned, 0.0}, rng).mse);
        }

    const double var = 0.5;
    double total = 0.0;
    const int rounds = 10000;
    for (int r = 0; r < rounds; ++r)
    {
        std::vector<channel::MimoChannel> chans;
        std::vector<aircomp::DeviceTransmission> devs;
        for (int i = 0; i < 3; ++i)
        {
            chans.push_back(channel::sample_rayleigh_mimo(4, 3, rng, i));
            ComplexVector x(2);
            x << rng.complex_normal(), rng.complex_normal();
            devs.push_back({chans.back(), aircomp::zf_precoder(chans.back(), 2).precoder, x});
        }
        const auto bf = aircomp::design_beamformer(chans, 2);
        total += aircomp::transmit_round(bf, devs, {aircomp::Mode::aligned, var}, rng).mse;
    }
    const double ratio = total / rounds / var;
    return {worst_mse < 1e-18 && ratio >= 0.97 && ratio <= 1.03,
            fmt("max noiseless MSE %.3e (tol 1e-18), mean MSE / sigma^2 = %.4f (band [0.97, 1.03])", worst_mse,
                ratio)};
}

// 4. Centroid versus random unitary beamformer in raw mode with common random numbers.
Outcome beamformer_benefit()
{
    double centroid = 0.0;
    double random = 0.0;
    const int draws = 1000;
    const double var = 0.1;
    for (int t = 0; t < draws; ++t)
    {
        RngStream rng(104, static_cast<std::uint64_t>(t));
        std::vector<channel::MimoChannel> chans;
        std::vector<aircomp::DeviceTransmission> devs;
        for (int i = 0; i < 4; ++i)
        {
            chans.push_back(channel::sample_rayleigh_mimo(4, 3, rng, i));
            ComplexVector x(2);
            x << rng.complex_normal(), rng.complex_normal();
            devs.push_back({chans.back(), aircomp::zf_precoder(chans.back(), 2).precoder, x});
        }
        const auto a_star = aircomp::design_beamformer(chans, 2);
        const auto a_rand = aircomp::random_beamformer(4, 2, rng);
        RngStream n1(204, static_cast<std::uint64_t>(t));
        RngStream n2(204, static_cast<std::uint64_t>(t));
        centroid += aircomp::transmit_round(a_star, devs, {aircomp::Mode::raw, var}, n1).mse;
        random += aircomp::transmit_round(a_rand, devs, {aircomp::Mode::raw, var}, n2).mse;
    }
    centroid /= draws;
    random /= draws;
    return {centroid < random, fmt("mean raw MSE centroid %.4f vs random %.4f over %d paired draws", centroid,
                                   random, draws)};
}

// 5. Quantizer correctness.
Outcome quantizer_correctness()
{
    RngStream rng(105, 0);
    codebooks::CodebookBundle b;
    b.m = 4;
    b.l = 16;
    b.norm_cb = codebooks::uniform_scalar_codebook(0.0, 16.0, 6);
    b.block_cb = codebooks::line_packing(16, 4, rng);
    b.hinge_cb = codebooks::lloyd_codebook(codebooks::abs_gaussian_directions(4, 2000, rng), 8, rng);

    double worst_reassembly = 0.0;
    int search_mismatch = 0;
    int wire_mismatch = 0;
    int rate_mismatch = 0;
    for (int t = 0; t < 500; ++t)
    {
        RealVector g(64);
        for (Eigen::Index i = 0; i < 64; ++i)
            g(i) = rng.normal();
        const auto d = gradquant::decompose(g, 4);
        RealVector manual(64);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 16; ++k)
                manual(i * 16 + k) = d.rho * d.hinge(i) * d.block_dirs[static_cast<std::size_t>(i)](k);
        worst_reassembly = std::max(worst_reassembly, (manual - g).norm() / g.norm());

        const auto code = gradquant::quantize(g, b);
        for (int i = 0; i < 4; ++i)
        {
            // Exhaustive search over codewords and both signs for the minimum distance.
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t idx = 0;
            int sign = 1;
            for (Eigen::Index j = 0; j < b.block_cb.size(); ++j)
                for (int s : {1, -1})
                {
                    const double dist = (d.block_dirs[static_cast<std::size_t>(i)] -
                                         s * RealVector(b.block_cb.codewords.col(j)))
                                            .squaredNorm();
                    if (dist < best - 1e-15)
                    {
                        best = dist;
                        idx = static_cast<std::uint32_t>(j);
                        sign = s;
                    }
                }
            search_mismatch += code.block_indices[static_cast<std::size_t>(i)] != idx ||
                                       code.block_signs[static_cast<std::size_t>(i)] != sign
                                   ? 1
                                   : 0;
        }
        const auto wire = gradquant::encode_wire(code);
        wire_mismatch += gradquant::decode_wire(wire) == code && gradquant::encode_wire(gradquant::decode_wire(wire)) == wire ? 0 : 1;
        const double expect = (6.0 + 4.0 * (4.0 + 1.0) + 8.0) / 64.0;
        rate_mismatch += gradquant::bits_per_coefficient(code) == expect && code.payload_bits() == 34 ? 0 : 1;
    }
    const bool pass = worst_reassembly < 1e-12 && search_mismatch == 0 && wire_mismatch == 0 && rate_mismatch == 0;
    return {pass, fmt("reassembly %.2e, search mismatches %d, wire mismatches %d, rate mismatches %d",
                      worst_reassembly, search_mismatch, wire_mismatch, rate_mismatch)};
}

harness::ExperimentConfig rate_fidelity_config(harness::QuantPolicy policy, std::uint64_t seed)
{
    harness::ExperimentConfig c;
    c.kind = harness::ExperimentKind::federated_quantized;
    c.devices = 20;
    c.rounds = 200;
    c.seed = seed;
    c.learner.architecture = "logistic";
    c.learner.lr = 0.5;
    c.learner.dataset.dim = 64;
    c.learner.dataset.offset = 1.0;
    c.learner.dataset.train_per_device = 50;
    c.learner.dataset.test_count = 2000;
    c.quantization.policy = policy;
    c.quantization.blocks = 4;
    c.quantization.b_rho = 4;
    c.quantization.b_s = 4;
    c.quantization.b_h = 8;
    c.quantization.pilot_samples = 500;
    c.quantization.sign_lr = 0.01;
    return c;
}

// 6. Rate-fidelity comparison of hierarchical quantization, signSGD and unquantized SGD.
Outcome rate_fidelity()
{
    double acc[3] = {0.0, 0.0, 0.0};
    double rate = 0.0;
    const harness::QuantPolicy policies[3] = {harness::QuantPolicy::hierarchical, harness::QuantPolicy::signsgd,
                                              harness::QuantPolicy::unquantized};
    const int seeds = 5;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed)
        for (int p = 0; p < 3; ++p)
        {
            const auto run = harness::run_federated_quantized(rate_fidelity_config(policies[p], seed));
            acc[p] += run.metrics.back().test_accuracy / seeds;
            if (p == 0)
                rate = std::max(rate, *run.metrics.back().bits_per_coefficient);
        }
    const double h_vs_s = std::abs(acc[0] - acc[1]);
    const bool pass = rate <= 0.5 && h_vs_s <= 0.02 && std::abs(acc[0] - acc[2]) <= 0.03 &&
                      std::abs(acc[1] - acc[2]) <= 0.03;
    return {pass, fmt("hierarchical %.4f at %.4f b/coeff, signSGD %.4f, unquantized %.4f", acc[0], rate, acc[1],
                      acc[2])};
}

harness::ExperimentConfig scheduling_config(scheduling::Policy policy, std::uint64_t seed)
{
    harness::ExperimentConfig c;
    c.kind = harness::ExperimentKind::centralized_scheduling;
    c.devices = 10;
    c.rounds = 100;
    c.seed = seed;
    c.channel.mean_snr_db = 15.0;
    c.channel.fading = true;
    c.channel.resample_snr = true;
    c.scheduling.policy = policy;
    c.scheduling.sample_mode = harness::SampleMode::random_sample;
    c.scheduling.pool_size = 50;
    c.scheduling.seed_samples = 10;
    c.learner.dataset.dim = 20;
    c.learner.dataset.offset = 1.0;
    c.learner.dataset.test_count = 2000;
    return c;
}

// 7. Importance-aware scheduling versus channel-aware and data-aware baselines.
Outcome scheduling_ordering()
{
    const int seeds = 20;
    double mean[3] = {0.0, 0.0, 0.0};
    int beats_channel = 0;
    int beats_data = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed)
    {
        double final_acc[3];
        int p = 0;
        for (auto policy : {scheduling::Policy::importance, scheduling::Policy::channel_aware,
                            scheduling::Policy::data_aware})
        {
            final_acc[p] = harness::run_centralized_scheduling(scheduling_config(policy, seed)).metrics.back().test_accuracy;
            mean[p] += final_acc[p] / seeds;
            ++p;
        }
        beats_channel += final_acc[0] > final_acc[1] ? 1 : 0;
        beats_data += final_acc[0] > final_acc[2] ? 1 : 0;
    }
    const bool pass = mean[0] - mean[1] > 0.0 && mean[0] - mean[2] > 0.0 && beats_channel >= 14 && beats_data >= 14;
    return {pass, fmt("mean final accuracy importance %.4f, channel-aware %.4f, data-aware %.4f; "
                      "importance wins %d/20 vs channel-aware, %d/20 vs data-aware",
                      mean[0], mean[1], mean[2], beats_channel, beats_data)};
}

// 8. Noiseless aligned AirComp federation equals pooled-gradient SGD.
Outcome harness_anchor()
{
    harness::ExperimentConfig c;
    c.kind = harness::ExperimentKind::federated_aircomp;
    c.devices = 10;
    c.rounds = 50;
    c.seed = 108;
    c.channel.noise_variance = 0.0;
    c.channel.mode = aircomp::Mode::aligned;
    c.learner.lr = 0.5;
    c.learner.dataset.dim = 16;
    c.learner.dataset.train_per_device = 30;
    c.learner.dataset.test_count = 200;
    const auto run = harness::run_federated_aircomp(c, {true});
    const auto data = harness::make_federated_data(c);
    auto model = harness::initial_model(c, data.arch);
    double worst = 0.0;
    for (const auto &params : run.parameters)
    {
        learners::Dataset pooled;
        RealVector mean = RealVector::Zero(model.parameters.size());
        for (const auto &local : data.devices)
            mean += learners::fed_local_gradient(model, local);
        mean /= static_cast<double>(data.devices.size());
        model.parameters -= c.learner.lr * mean;
        worst = std::max(worst, (params - model.parameters).norm());
    }
    return {run.parameters.size() == 50 && worst < 1e-9,
            fmt("max per-round parameter distance %.3e over %zu rounds (tol 1e-9)", worst, run.parameters.size())};
}

// 9. Gradient correctness on random small models.
Outcome gradient_gate()
{
    RngStream rng(109, 0);
    double worst = 0.0;
    for (int m = 0; m < 20; ++m)
    {
        learners::Architecture a;
        a.input_dim = 2 + static_cast<int>(rng.index(10));
        a.hidden = m % 2 == 0 ? 0 : 2 + static_cast<int>(rng.index(10));
        a.num_classes = 2 + static_cast<int>(rng.index(4));
        const auto model = learners::FedModel::random(a, rng, 0.7);
        learners::Dataset batch;
        for (int n = 0; n < 6; ++n)
        {
            RealVector x(a.input_dim);
            for (Eigen::Index i = 0; i < x.size(); ++i)
                x(i) = rng.normal();
            batch.push_back({x, static_cast<int>(rng.index(static_cast<std::size_t>(a.num_classes))), -1});
        }
        const RealVector g = learners::fed_local_gradient(model, batch);
        const double h = 1e-5;
        for (Eigen::Index i = 0; i < g.size(); ++i)
        {
            auto plus = model, minus = model;
            plus.parameters(i) += h;
            minus.parameters(i) -= h;
            const double fd = (learners::fed_loss(plus, batch) - learners::fed_loss(minus, batch)) / (2.0 * h);
            worst = std::max(worst, std::abs(g(i) - fd) / std::max(1.0, std::abs(fd)));
        }
    }
    return {worst < 1e-4, fmt("max relative deviation %.3e over 20 models (tol 1e-4)", worst)};
}

std::string without_wall_time(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream out;
    std::string line;
    while (std::getline(in, line))
        out << line.substr(0, line.rfind(',')) << '\n';
    return out.str();
}

// 10. Byte-identical output across repeated runs, wall time excluded.
Outcome determinism()
{
    const auto dir = std::filesystem::temp_directory_path() / "edgeflow_acceptance";
    std::filesystem::create_directories(dir);

    std::vector<std::pair<std::string, harness::ExperimentConfig>> configs;
    {
        auto c = rate_fidelity_config(harness::QuantPolicy::hierarchical, 7);
        c.rounds = 30;
        configs.emplace_back("federated_quantized", c);
    }
    {
        harness::ExperimentConfig c;
        c.kind = harness::ExperimentKind::federated_aircomp;
        c.devices = 5;
        c.rounds = 20;
        c.seed = 7;
        c.channel.noise_variance = 0.05;
        c.learner.dataset.dim = 16;
        configs.emplace_back("federated_aircomp", c);
    }
    configs.emplace_back("centralized_scheduling", scheduling_config(scheduling::Policy::importance, 7));
    {
        harness::ExperimentConfig c;
        c.kind = harness::ExperimentKind::aircomp_sweep;
        c.seed = 7;
        c.sweep.trials = 200;
        configs.emplace_back("aircomp_sweep", c);
    }

    int identical = 0;
    std::string failures;
    for (auto &[name, config] : configs)
    {
        config.output = dir / (name + "_a.csv");
        harness::execute(config);
        config.output = dir / (name + "_b.csv");
        harness::execute(config);
        const bool has_wall_time = config.kind != harness::ExperimentKind::aircomp_sweep;
        const auto read = [&](const std::string &suffix) {
            const auto p = dir / (name + suffix);
            if (has_wall_time)
                return without_wall_time(p);
            std::ifstream in(p, std::ios::binary);
            std::stringstream s;
            s << in.rdbuf();
            return s.str();
        };
        const auto a = read("_a.csv");
        if (!a.empty() && a == read("_b.csv"))
            ++identical;
        else
            failures += " " + name;
    }
    std::filesystem::remove_all(dir);
    return {identical == static_cast<int>(configs.size()),
            fmt("%d/%zu experiment kinds byte-identical%s%s", identical, configs.size(),
                failures.empty() ? "" : "; differing:", failures.c_str())};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"beamformer optimality", beamformer_optimality},
        {"distance identity", distance_identity},
        {"AirComp exactness and noise law", aircomp_exactness},
        {"beamformer benefit in raw mode", beamformer_benefit},
        {"quantizer correctness", quantizer_correctness},
        {"rate-fidelity comparison", rate_fidelity},
        {"scheduling policy ordering", scheduling_ordering},
        {"harness anchor", harness_anchor},
        {"gradient correctness gate", gradient_gate},
        {"determinism", determinism},
    };

    int failed = 0;
    int index = 1;
    for (const auto &[name, run] : criteria)
    {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try
        {
            outcome = run();
        }
        catch (const std::exception &e)
        {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("AC%-2d %s  %s: %s [%.1f s]\n", index, outcome.pass ? "PASS" : "FAIL", name.c_str(),
                    outcome.detail.c_str(), seconds);
        std::fflush(stdout);
        failed += outcome.pass ? 0 : 1;
        ++index;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
