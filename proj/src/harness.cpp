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

#include "edgeflow/harness.hpp"

#include "edgeflow/aircomp.hpp"
#include "edgeflow/errors.hpp"
#include "edgeflow/gradquant.hpp"
#include "edgeflow/log.hpp"
#include "edgeflow/scheduling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace edgeflow::harness
{

namespace
{

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Unquantized payloads are counted as raw float64 coefficients.
constexpr std::uint64_t kFloatBits = 64;

learners::Architecture architecture_for(const ExperimentConfig &config, int input_dim, int num_classes)
{
    learners::Architecture a;
    a.input_dim = input_dim;
    a.num_classes = num_classes;
    a.hidden = config.learner.architecture == "mlp" ? config.learner.hidden : 0;
    return a;
}

std::uint64_t sub_seed(const ExperimentConfig &config, StreamTag tag)
{
    return splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(tag)));
}

learners::Dataset synthetic(const ExperimentConfig &config, StreamTag tag, std::size_t count)
{
    const auto &d = config.learner.dataset;
    learners::GaussianMixtureSpec spec;
    spec.means = learners::two_gaussian_means(d.dim, d.offset);
    spec.scale = d.scale;
    spec.count = count;
    spec.seed = sub_seed(config, tag);
    return learners::gaussian_mixture(spec);
}

// Shuffled MNIST split into (test, train) with the configured sizes.
std::pair<learners::Dataset, learners::Dataset> mnist_split(const ExperimentConfig &config, std::size_t train_count)
{
    const auto &d = config.learner.dataset;
    learners::Dataset all = learners::load_mnist(*d.mnist_images, *d.mnist_labels, d.classes);
    RngStream rng = stream(config, StreamTag::data, 0, 0);
    std::shuffle(all.begin(), all.end(), rng.engine());
    const auto test_count = static_cast<std::size_t>(d.test_count);
    if (all.size() < test_count + train_count)
        throw ConfigError("MNIST files hold " + std::to_string(all.size()) + " usable samples, configuration needs " +
                          std::to_string(test_count + train_count));
    learners::Dataset test(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(test_count));
    learners::Dataset train(all.begin() + static_cast<std::ptrdiff_t>(test_count),
                            all.begin() + static_cast<std::ptrdiff_t>(test_count + train_count));
    return {std::move(test), std::move(train)};
}

RealVector mean_of(const std::vector<RealVector> &vs)
{
    RealVector sum = RealVector::Zero(vs.front().size());
    for (const auto &v : vs)
        sum += v;
    return sum / static_cast<double>(vs.size());
}

std::vector<RealVector> all_device_gradients(const ExperimentConfig &config, const learners::FedModel &model,
                                             const FederatedData &data, int round)
{
    std::vector<RealVector> grads;
    grads.reserve(data.devices.size());
    for (std::size_t k = 0; k < data.devices.size(); ++k)
        grads.push_back(device_gradient(config, model, data.devices[k], static_cast<int>(k), round));
    return grads;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1)
        return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

RngStream stream(const ExperimentConfig &config, StreamTag tag, std::uint64_t device, std::uint64_t round)
{
    return RngStream::derive(config.seed, static_cast<std::uint64_t>(tag), device, round);
}

FederatedData make_federated_data(const ExperimentConfig &config)
{
    const auto &d = config.learner.dataset;
    const auto k = static_cast<std::size_t>(config.devices);
    const std::size_t train_count = k * static_cast<std::size_t>(d.train_per_device);

    learners::Dataset train;
    FederatedData out;
    int num_classes = 2;
    if (d.kind == "mnist")
    {
        std::tie(out.test, train) = mnist_split(config, train_count);
        num_classes = d.classes ? 2 : 10;
    }
    else
    {
        train = synthetic(config, StreamTag::data, train_count);
        out.test = synthetic(config, StreamTag::test_data, static_cast<std::size_t>(d.test_count));
    }

    out.devices.assign(k, {});
    for (std::size_t n = 0; n < train.size(); ++n)
    {
        train[n].origin_device = static_cast<int>(n % k);
        out.devices[n % k].push_back(std::move(train[n]));
    }
    out.arch = architecture_for(config, static_cast<int>(out.test.front().features.size()), num_classes);
    return out;
}

learners::FedModel initial_model(const ExperimentConfig &config, const learners::Architecture &arch)
{
    RngStream rng = stream(config, StreamTag::init, 0, 0);
    return learners::FedModel::random(arch, rng, config.learner.init_scale);
}

RealVector device_gradient(const ExperimentConfig &config, const learners::FedModel &model,
                           const learners::Dataset &local, int device, int round)
{
    const auto batch = static_cast<std::size_t>(config.learner.batch_size);
    if (batch == 0 || batch >= local.size())
        return learners::fed_local_gradient(model, local);

    RngStream rng = stream(config, StreamTag::batch, static_cast<std::uint64_t>(device),
                           static_cast<std::uint64_t>(round));
    std::vector<std::size_t> idx(local.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    learners::Dataset minibatch;
    minibatch.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i)
    {
        const std::size_t j = i + rng.index(idx.size() - i);
        std::swap(idx[i], idx[j]);
        minibatch.push_back(local[idx[i]]);
    }
    return learners::fed_local_gradient(model, minibatch);
}

codebooks::CodebookBundle build_pilot_codebooks(const ExperimentConfig &config)
{
    const auto &q = config.quantization;
    const FederatedData data = make_federated_data(config);
    const Eigen::Index dim = data.arch.parameter_count();
    if (q.blocks > dim)
        throw ConfigError("field 'quantization.blocks' exceeds the gradient dimension " + std::to_string(dim));

    // Unquantized pilot rounds from the run's own initial model.
    learners::FedModel model = initial_model(config, data.arch);
    std::vector<RealVector> hinges;
    std::vector<double> norms;
    const auto wanted = static_cast<std::size_t>(std::max(q.pilot_samples, 1));
    for (int round = 0; hinges.size() < wanted; ++round)
    {
        const auto grads = all_device_gradients(config, model, data, round);
        for (const auto &g : grads)
        {
            const auto d = gradquant::decompose(g, q.blocks);
            norms.push_back(d.rho);
            if (d.rho > 0.0 && hinges.size() < wanted)
                hinges.push_back(d.hinge);
        }
        model = learners::fed_apply(model, mean_of(grads), config.learner.lr);
        if (round > 10 * static_cast<int>(wanted))
            break;
    }

    const double med = median(norms);
    codebooks::CodebookBundle b;
    b.m = q.blocks;
    b.l = static_cast<int>((dim + q.blocks - 1) / q.blocks);
    b.norm_cb = codebooks::uniform_scalar_codebook(0.0, med > 0.0 ? 3.0 * med : 1.0, q.b_rho);

    RngStream pack_rng = stream(config, StreamTag::codebook, 0, 0);
    if (b.l >= 2)
    {
        b.block_cb = codebooks::line_packing(b.l, q.b_s, pack_rng, {q.packing_iters, 1e-6});
    }
    else
    {
        // Scalar blocks: a one-dimensional "codebook" is just +-1.
        b.block_cb = codebooks::GrassmannCodebook{RealMatrix::Ones(1, Eigen::Index{1} << q.b_s), q.b_s,
                                                  codebooks::Kind::isotropic};
    }

    RngStream lloyd_rng = stream(config, StreamTag::codebook, 1, 0);
    const std::size_t codewords = std::size_t{1} << q.b_h;
    if (hinges.size() < codewords)
    {
        log().info("pilot produced {} hinge vectors for {} codewords; training on |Gaussian| directions",
                   hinges.size(), codewords);
        hinges = codebooks::abs_gaussian_directions(q.blocks, std::max(wanted, 2 * codewords), lloyd_rng);
    }
    b.hinge_cb = codebooks::lloyd_codebook(hinges, q.b_h, lloyd_rng, {q.lloyd_iters, 1e-8});
    log().debug("codebooks: M={} L={} norm range [0, {}] block coherence {}", b.m, b.l, b.norm_cb.levels.back(),
                b.block_cb.coherence());
    return b;
}

codebooks::CodebookBundle codebooks_for(const ExperimentConfig &config)
{
    if (!config.quantization.codebook)
        return build_pilot_codebooks(config);
    codebooks::CodebookBundle b;
    try
    {
        b = codebooks::load_bundle(*config.quantization.codebook);
    }
    catch (const FormatError &e)
    {
        throw ConfigError("field 'quantization.codebook': " + std::string(e.what()));
    }
    const auto &q = config.quantization;
    if (b.m != q.blocks || b.norm_cb.bits != q.b_rho || b.block_cb.bits != q.b_s || b.hinge_cb.bits != q.b_h)
        throw ConfigError("codebook bundle " + config.quantization.codebook->string() +
                          " does not match the configured (blocks, b_rho, b_s, b_h)");
    return b;
}

RunResult run_federated_quantized(const ExperimentConfig &config, const RunOptions &options)
{
    if (config.kind != ExperimentKind::federated_quantized)
        throw ConfigError("run_federated_quantized needs experiment 'federated_quantized'");
    const auto &q = config.quantization;
    const FederatedData data = make_federated_data(config);
    learners::FedModel model = initial_model(config, data.arch);
    const Eigen::Index dim = data.arch.parameter_count();

    std::optional<codebooks::CodebookBundle> bundle;
    if (q.policy == QuantPolicy::hierarchical)
    {
        bundle = codebooks_for(config);
        if ((dim + bundle->m - 1) / bundle->m != bundle->l)
            throw ConfigError("codebook block length " + std::to_string(bundle->l) +
                              " does not fit a gradient of dimension " + std::to_string(dim));
    }

    log().info("federated_quantized: policy={} K={} T={} dim={}", to_string(q.policy), config.devices, config.rounds,
               dim);
    RunResult result;
    std::uint64_t cumulative = 0;
    for (int round = 0; round < config.rounds; ++round)
    {
        const auto start = Clock::now();
        const auto grads = all_device_gradients(config, model, data, round);

        RealVector aggregate = RealVector::Zero(dim);
        std::uint64_t round_bits = 0;
        double rate = 0.0;
        double lr = config.learner.lr;
        for (const auto &g : grads)
        {
            switch (q.policy)
            {
            case QuantPolicy::unquantized:
                aggregate += g;
                round_bits += kFloatBits * static_cast<std::uint64_t>(dim);
                rate = static_cast<double>(kFloatBits);
                break;
            case QuantPolicy::signsgd: {
                const auto code = gradquant::signsgd_quantize(g);
                aggregate += gradquant::signsgd_dequantize(code);
                round_bits += code.payload_bits();
                rate = gradquant::bits_per_coefficient(code);
                lr = q.sign_lr;
                break;
            }
            case QuantPolicy::hierarchical: {
                // The server sees only the wire bytes.
                const auto wire = gradquant::encode_wire(gradquant::quantize(g, *bundle));
                const auto code = gradquant::decode_wire(wire);
                aggregate += gradquant::dequantize(code, *bundle);
                round_bits += code.payload_bits();
                rate = gradquant::bits_per_coefficient(code);
                break;
            }
            }
        }
        aggregate /= static_cast<double>(grads.size());
        model = learners::fed_apply(model, aggregate, lr);
        cumulative += round_bits;

        RoundMetrics m;
        m.round = round;
        m.test_accuracy = learners::evaluate(model, data.test);
        m.cumulative_bits_sent = cumulative;
        m.bits_per_coefficient = rate;
        m.wall_time_ms = elapsed_ms(start);
        log().debug("round {} accuracy {:.4f}", round, m.test_accuracy);
        result.metrics.push_back(m);
        if (options.record_parameters)
            result.parameters.push_back(model.parameters);
    }
    return result;
}

RunResult run_federated_aircomp(const ExperimentConfig &config, const RunOptions &options)
{
    if (config.kind != ExperimentKind::federated_aircomp)
        throw ConfigError("run_federated_aircomp needs experiment 'federated_aircomp'");
    const auto &ch = config.channel;
    const FederatedData data = make_federated_data(config);
    learners::FedModel model = initial_model(config, data.arch);

    aircomp::TransmitOptions tx;
    tx.mode = ch.mode;
    tx.noise_variance = ch.noise_variance;
    tx.power_cap = ch.power_cap;

    log().info("federated_aircomp: K={} T={} M_r={} M_t={} N={} noise={}", config.devices, config.rounds, ch.m_r,
               ch.m_t, ch.streams, ch.noise_variance);
    RunResult result;
    for (int round = 0; round < config.rounds; ++round)
    {
        const auto start = Clock::now();
        const auto grads = all_device_gradients(config, model, data, round);

        std::vector<channel::MimoChannel> channels;
        channels.reserve(grads.size());
        for (std::size_t k = 0; k < grads.size(); ++k)
        {
            RngStream rng = stream(config, StreamTag::channel, k, static_cast<std::uint64_t>(round));
            channels.push_back(channel::sample_rayleigh_mimo(ch.m_r, ch.m_t, rng, static_cast<int>(k)));
        }
        RngStream noise = stream(config, StreamTag::noise, 0, static_cast<std::uint64_t>(round));
        const aircomp::VectorAggregate agg = aircomp::aircomp_mean(grads, channels, ch.streams, tx, noise);
        if (!agg.excluded_devices.empty())
            log().debug("round {}: {} device(s) excluded from AirComp", round, agg.excluded_devices.size());
        model = learners::fed_apply(model, agg.mean, config.learner.lr);

        RoundMetrics m;
        m.round = round;
        m.test_accuracy = learners::evaluate(model, data.test);
        m.aircomp_mse = agg.mean_mse;
        m.wall_time_ms = elapsed_ms(start);
        result.metrics.push_back(m);
        if (options.record_parameters)
            result.parameters.push_back(model.parameters);
    }
    return result;
}

RunResult run_centralized_scheduling(const ExperimentConfig &config, const RunOptions &options)
{
    if (config.kind != ExperimentKind::centralized_scheduling)
        throw ConfigError("run_centralized_scheduling needs experiment 'centralized_scheduling'");
    const auto &s = config.scheduling;
    const auto &d = config.learner.dataset;
    const auto k = static_cast<std::size_t>(config.devices);
    const auto pool_size = static_cast<std::size_t>(s.pool_size);

    learners::Dataset pools_flat;
    learners::Dataset seed;
    learners::Dataset test;
    if (d.kind == "mnist")
    {
        if (!d.classes)
            throw ConfigError("centralized scheduling on MNIST needs 'learner.dataset.classes' (binary task)");
        auto [t, train] = mnist_split(config, k * pool_size + static_cast<std::size_t>(s.seed_samples));
        test = std::move(t);
        seed.assign(train.end() - s.seed_samples, train.end());
        train.resize(k * pool_size);
        pools_flat = std::move(train);
    }
    else
    {
        pools_flat = synthetic(config, StreamTag::data, k * pool_size);
        seed = synthetic(config, StreamTag::seed_set, static_cast<std::size_t>(s.seed_samples));
        test = synthetic(config, StreamTag::test_data, static_cast<std::size_t>(d.test_count));
    }

    // Standardize on everything the system holds before training (features only).
    learners::Dataset fit_set = pools_flat;
    fit_set.insert(fit_set.end(), seed.begin(), seed.end());
    const auto standardizer = learners::Standardizer::fit(fit_set);
    standardizer.apply_inplace(pools_flat);
    standardizer.apply_inplace(seed);
    standardizer.apply_inplace(test);
    pools_flat = learners::to_signed_labels(std::move(pools_flat));
    seed = learners::to_signed_labels(std::move(seed));
    test = learners::to_signed_labels(std::move(test));

    // Ground-truth labels stay with the simulator; devices only see features.
    std::vector<learners::Dataset> pools(k);
    for (std::size_t n = 0; n < pools_flat.size(); ++n)
    {
        pools_flat[n].origin_device = static_cast<int>(n % k);
        pools[n % k].push_back(std::move(pools_flat[n]));
    }

    learners::SvmModel model;
    try
    {
        model = learners::svm_init(seed, s.svm_c);
    }
    catch (const InvalidInput &e)
    {
        throw ConfigError("cannot train the initial classifier: " + std::string(e.what()));
    }

    log().info("centralized_scheduling: policy={} K={} T={} SNR={} dB", scheduling::to_string(s.policy),
               config.devices, config.rounds, config.channel.mean_snr_db);
    const auto fading = config.channel.fading ? channel::Fading::rayleigh : channel::Fading::none;

    RunResult result;
    for (int round = 0; round < config.rounds; ++round)
    {
        const auto start = Clock::now();
        std::vector<scheduling::DeviceReport> reports;
        for (std::size_t dev = 0; dev < k; ++dev)
        {
            if (pools[dev].empty())
                continue;
            RngStream snr_rng = stream(config, StreamTag::snr, dev,
                                       config.channel.resample_snr ? static_cast<std::uint64_t>(round) : 0);
            const auto link =
                channel::sample_scalar_link(config.channel.mean_snr_db, snr_rng, static_cast<int>(dev), fading);

            scheduling::DeviceReport r;
            r.device_id = static_cast<int>(dev);
            r.snr_linear = link.snr_linear;
            if (s.sample_mode == SampleMode::max_over_pool)
            {
                std::vector<double> u;
                u.reserve(pools[dev].size());
                for (const auto &x : pools[dev])
                    u.push_back(scheduling::distance_uncertainty(model, x.features));
                const auto imp = scheduling::dii(link.snr_linear, u);
                r.best_sample_index = imp.best_index;
                r.max_uncertainty = u[imp.best_index];
            }
            else
            {
                RngStream pick = stream(config, StreamTag::pick, dev, static_cast<std::uint64_t>(round));
                r.best_sample_index = pick.index(pools[dev].size());
                r.max_uncertainty = scheduling::distance_uncertainty(model, pools[dev][r.best_sample_index].features);
            }
            reports.push_back(r);
        }
        if (reports.empty())
        {
            result.early_stopped = true;
            result.stop_reason = "all device pools exhausted after " + std::to_string(round) + " rounds";
            log().info("{}", result.stop_reason);
            break;
        }

        const auto decision = scheduling::select_device(reports, s.policy);
        const auto &report = reports[decision.selected_report];
        auto &pool = pools[static_cast<std::size_t>(report.device_id)];
        const learners::Sample &sent = pool[report.best_sample_index];

        RngStream rx = stream(config, StreamTag::receive, static_cast<std::uint64_t>(report.device_id),
                              static_cast<std::uint64_t>(round));
        // The labeller annotates the received sample with the true label.
        const learners::Sample received{learners::noisy_receive(sent.features, report.snr_linear, rx), sent.label,
                                        sent.origin_device};
        model = learners::svm_update(model, received, learners::svm_step(round, s.step0, s.tau));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(report.best_sample_index));

        RoundMetrics m;
        m.round = round;
        m.test_accuracy = learners::evaluate(model, test);
        m.selected_device = decision.selected_device;
        m.wall_time_ms = elapsed_ms(start);
        result.metrics.push_back(m);
        if (options.record_parameters)
        {
            RealVector p(model.w.size() + 1);
            p << model.w, model.b;
            result.parameters.push_back(std::move(p));
        }
    }
    return result;
}

std::vector<SweepRow> run_aircomp_sweep(const ExperimentConfig &config)
{
    if (config.kind != ExperimentKind::aircomp_sweep)
        throw ConfigError("run_aircomp_sweep needs experiment 'aircomp_sweep'");
    const auto &sw = config.sweep;
    for (int n : sw.streams)
        for (int r : sw.m_r)
            for (int t : sw.m_t)
                if (n < 1 || n > std::min(r, t))
                    throw ConfigError("sweep cell with N=" + std::to_string(n) + ", M_r=" + std::to_string(r) +
                                      ", M_t=" + std::to_string(t) + " is infeasible (N > min(M_r, M_t))");

    std::vector<SweepRow> rows;
    for (int kdev : sw.devices)
        for (int m_r : sw.m_r)
            for (int m_t : sw.m_t)
                for (int n : sw.streams)
                {
                    const std::size_t first = rows.size();
                    for (double var : sw.noise_variance)
                        for (auto mode : sw.modes)
                            for (const auto &bf : sw.beamformers)
                                rows.push_back(SweepRow{kdev, m_r, m_t, n, var, mode, bf, 0, 0.0, 0.0});

                    for (int trial = 0; trial < sw.trials; ++trial)
                    {
                        const auto tr = static_cast<std::uint64_t>(trial);
                        std::vector<aircomp::DeviceTransmission> devices;
                        std::vector<channel::MimoChannel> channels;
                        bool usable = true;
                        for (int dev = 0; dev < kdev && usable; ++dev)
                        {
                            RngStream crng = stream(config, StreamTag::sweep_channel, static_cast<std::uint64_t>(dev), tr);
                            auto ch = channel::sample_rayleigh_mimo(m_r, m_t, crng, dev);
                            RngStream prng = stream(config, StreamTag::sweep_payload, static_cast<std::uint64_t>(dev), tr);
                            ComplexVector x(n);
                            for (int i = 0; i < n; ++i)
                                x(i) = prng.complex_normal();
                            try
                            {
                                auto zf = aircomp::zf_precoder(ch, n);
                                devices.push_back({ch, zf.precoder, x});
                                channels.push_back(std::move(ch));
                            }
                            catch (const IllConditionedChannel &)
                            {
                                usable = false;
                            }
                        }
                        if (!usable)
                            continue;

                        const auto centroid = aircomp::design_beamformer(channels, n);
                        RngStream brng = stream(config, StreamTag::sweep_beamformer, 0, tr);
                        const auto random = aircomp::random_beamformer(m_r, n, brng);

                        for (std::size_t i = first; i < rows.size(); ++i)
                        {
                            SweepRow &row = rows[i];
                            aircomp::TransmitOptions opt;
                            opt.mode = row.mode;
                            opt.noise_variance = row.noise_variance;
                            // Same noise realization for every cell of this trial.
                            RngStream nrng = stream(config, StreamTag::sweep_noise, 0, tr);
                            try
                            {
                                const auto r = aircomp::transmit_round(row.beamformer == "random" ? random : centroid,
                                                                       devices, opt, nrng);
                                row.mean_mse += r.mse;
                                double power = 0.0;
                                for (double p : r.per_device_tx_power)
                                    power += p;
                                row.mean_tx_power += power / static_cast<double>(r.contributors);
                                ++row.trials;
                            }
                            catch (const AlignmentSingular &)
                            {
                            }
                        }
                    }
                    for (std::size_t i = first; i < rows.size(); ++i)
                        if (rows[i].trials > 0)
                        {
                            rows[i].mean_mse /= rows[i].trials;
                            rows[i].mean_tx_power /= rows[i].trials;
                        }
                }
    return rows;
}

std::string format_sweep(const std::vector<SweepRow> &rows)
{
    std::string out = kSweepHeader;
    out += '\n';
    for (const auto &r : rows)
    {
        const std::string snr = r.noise_variance > 0.0 ? number(0.0 - 10.0 * std::log10(r.noise_variance)) : "inf";
        out += std::to_string(r.devices) + ',' + std::to_string(r.m_r) + ',' + std::to_string(r.m_t) + ',' +
               std::to_string(r.streams) + ',' + number(r.noise_variance) + ',' + snr + ',' +
               (r.mode == aircomp::Mode::raw ? "raw" : "aligned") + ',' + r.beamformer + ',' +
               std::to_string(r.trials) + ',' + number(r.mean_mse) + ',' + number(r.mean_tx_power) + '\n';
    }
    return out;
}

RunResult execute(const ExperimentConfig &config)
{
    const auto write_text = [&](const std::string &text) {
        if (!config.output)
            return;
        if (config.output->has_parent_path())
            std::filesystem::create_directories(config.output->parent_path());
        std::ofstream out(*config.output, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open " + config.output->string() + " for writing");
        out << text;
    };

    RunResult result;
    switch (config.kind)
    {
    case ExperimentKind::federated_quantized:
        result = run_federated_quantized(config);
        break;
    case ExperimentKind::federated_aircomp:
        result = run_federated_aircomp(config);
        break;
    case ExperimentKind::centralized_scheduling:
        result = run_centralized_scheduling(config);
        break;
    case ExperimentKind::aircomp_sweep:
        write_text(format_sweep(run_aircomp_sweep(config)));
        return result;
    case ExperimentKind::codebook_build: {
        const auto bundle = build_pilot_codebooks(config);
        if (config.output)
            codebooks::save_bundle(bundle, *config.output);
        return result;
    }
    }
    if (config.output)
        write_metrics(result.metrics, *config.output);
    return result;
}

} // namespace edgeflow::harness
