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

#include "edgeflow/config.hpp"

#include "edgeflow/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace edgeflow::harness
{

using nlohmann::json;

namespace
{

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Fields
{
  public:
    Fields(const json &obj, std::string path) : obj_(obj), path_(std::move(path))
    {
        if (!obj_.is_object())
            throw ConfigError(where() + " must be an object");
    }

    template <typename T> void get(const char *key, T &out)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null())
            return;
        try
        {
            out = it->get<T>();
        }
        catch (const json::exception &e)
        {
            throw ConfigError("field '" + field(key) + "': " + e.what());
        }
    }

    template <typename T> void get(const char *key, std::optional<T> &out)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null())
            return;
        T value{};
        get(key, value);
        out = std::move(value);
    }

    std::optional<Fields> child(const char *key)
    {
        seen_.insert(key);
        const auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null())
            return std::nullopt;
        return Fields(*it, field(key));
    }

    void finish() const
    {
        for (const auto &item : obj_.items())
            if (!seen_.contains(item.key()))
                throw ConfigError("unknown config key '" + field(item.key().c_str()) + "'");
    }

    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

  private:
    std::string where() const { return path_.empty() ? "config root" : "'" + path_ + "'"; }

    const json &obj_;
    std::string path_;
    std::set<std::string> seen_;
};

ExperimentKind parse_kind(const std::string &s)
{
    for (auto k : {ExperimentKind::federated_quantized, ExperimentKind::federated_aircomp,
                   ExperimentKind::centralized_scheduling, ExperimentKind::aircomp_sweep,
                   ExperimentKind::codebook_build})
        if (s == to_string(k))
            return k;
    throw ConfigError("field 'experiment': unknown experiment kind '" + s + "'");
}

QuantPolicy parse_quant(const std::string &s)
{
    for (auto p : {QuantPolicy::hierarchical, QuantPolicy::signsgd, QuantPolicy::unquantized})
        if (s == to_string(p))
            return p;
    throw ConfigError("field 'quantization.policy': unknown policy '" + s + "'");
}

aircomp::Mode parse_mode(const std::string &s, const std::string &field)
{
    if (s == "raw")
        return aircomp::Mode::raw;
    if (s == "aligned")
        return aircomp::Mode::aligned;
    throw ConfigError("field '" + field + "': unknown AirComp mode '" + s + "'");
}

std::string mode_name(aircomp::Mode m)
{
    return m == aircomp::Mode::raw ? "raw" : "aligned";
}

void require(bool ok, const std::string &message)
{
    if (!ok)
        throw ConfigError(message);
}

std::filesystem::path resolve(const std::filesystem::path &p, const std::filesystem::path &base)
{
    return p.is_relative() && !base.empty() ? base / p : p;
}

void require_file(const std::optional<std::filesystem::path> &p, const std::string &field)
{
    if (p && !std::filesystem::exists(*p))
        throw ConfigError("field '" + field + "': file " + p->string() + " does not exist");
}

void validate(const ExperimentConfig &c)
{
    require(c.devices > 0, "field 'devices' must be positive");
    require(c.rounds > 0, "field 'rounds' must be positive");
    const auto &ch = c.channel;
    require(ch.m_r > 0 && ch.m_t > 0 && ch.streams > 0, "channel dimensions must be positive");
    require(ch.noise_variance >= 0.0, "field 'channel.noise_variance' must be nonnegative");
    if (c.kind == ExperimentKind::federated_aircomp)
        require(ch.streams <= std::min(ch.m_r, ch.m_t),
                "field 'channel.streams' exceeds min(m_r, m_t): infeasible AirComp dimensions");
    const auto &q = c.quantization;
    require(q.blocks > 0, "field 'quantization.blocks' must be positive");
    for (int b : {q.b_rho, q.b_s, q.b_h})
        require(b >= 1 && b <= 24, "quantization bit widths must lie in [1, 24]");
    require(q.sign_lr > 0.0, "field 'quantization.sign_lr' must be positive");
    const auto &s = c.scheduling;
    require(s.pool_size > 0 && s.seed_samples >= 2, "scheduling pool_size > 0 and seed_samples >= 2 required");
    require(s.svm_c > 0.0 && s.step0 > 0.0 && s.tau > 0.0, "scheduling svm_c, step0 and tau must be positive");
    const auto &l = c.learner;
    require(l.architecture == "logistic" || l.architecture == "mlp",
            "field 'learner.architecture' must be 'logistic' or 'mlp'");
    require(l.architecture == "logistic" || (l.hidden > 0 && l.hidden <= 128),
            "field 'learner.hidden' must be in [1, 128] for the mlp architecture");
    require(l.lr > 0.0, "field 'learner.lr' must be positive");
    require(l.batch_size >= 0, "field 'learner.batch_size' must be nonnegative");
    const auto &d = l.dataset;
    require(d.kind == "synthetic" || d.kind == "mnist", "field 'learner.dataset.kind' must be synthetic or mnist");
    require(d.dim > 0 && d.train_per_device > 0 && d.test_count > 0, "dataset sizes must be positive");
    if (d.kind == "mnist")
        require(d.mnist_images && d.mnist_labels, "mnist dataset needs mnist_images and mnist_labels");
    const auto &sw = c.sweep;
    require(sw.trials > 0, "field 'sweep.trials' must be positive");
    for (const auto *axis : {&sw.devices, &sw.m_r, &sw.m_t, &sw.streams})
    {
        require(!axis->empty(), "sweep grid axes must be nonempty");
        for (int v : *axis)
            require(v > 0, "sweep grid entries for devices, m_r, m_t and streams must be positive");
    }
    require(!sw.noise_variance.empty() && !sw.modes.empty() && !sw.beamformers.empty(),
            "sweep grid axes must be nonempty");
    for (const auto &b : sw.beamformers)
        require(b == "centroid" || b == "random", "field 'sweep.beamformers': unknown beamformer '" + b + "'");
    for (double v : sw.noise_variance)
        require(v >= 0.0, "field 'sweep.noise_variance' entries must be nonnegative");
}

} // namespace

std::string_view to_string(ExperimentKind k)
{
    switch (k)
    {
    case ExperimentKind::federated_quantized:
        return "federated_quantized";
    case ExperimentKind::federated_aircomp:
        return "federated_aircomp";
    case ExperimentKind::centralized_scheduling:
        return "centralized_scheduling";
    case ExperimentKind::aircomp_sweep:
        return "aircomp_sweep";
    case ExperimentKind::codebook_build:
        return "codebook_build";
    }
    return "unknown";
}

std::string_view to_string(QuantPolicy p)
{
    switch (p)
    {
    case QuantPolicy::hierarchical:
        return "hierarchical";
    case QuantPolicy::signsgd:
        return "signsgd";
    case QuantPolicy::unquantized:
        return "unquantized";
    }
    return "unknown";
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path &base_dir)
{
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    ExperimentConfig c;
    Fields top(root, "");
    int version = -1;
    top.get("schema_version", version);
    if (version != kConfigSchemaVersion)
        throw ConfigError("field 'schema_version' must be " + std::to_string(kConfigSchemaVersion) + ", got " +
                          std::to_string(version));

    std::string kind;
    top.get("experiment", kind);
    if (kind.empty())
        throw ConfigError("field 'experiment' is required");
    c.kind = parse_kind(kind);
    top.get("devices", c.devices);
    top.get("rounds", c.rounds);
    top.get("seed", c.seed);
    std::optional<std::string> output;
    top.get("output", output);
    if (output)
        c.output = resolve(*output, base_dir);

    if (auto ch = top.child("channel"))
    {
        auto &p = c.channel;
        ch->get("mean_snr_db", p.mean_snr_db);
        ch->get("fading", p.fading);
        ch->get("resample_snr", p.resample_snr);
        ch->get("m_r", p.m_r);
        ch->get("m_t", p.m_t);
        ch->get("streams", p.streams);
        ch->get("noise_variance", p.noise_variance);
        std::string mode = mode_name(p.mode);
        ch->get("mode", mode);
        p.mode = parse_mode(mode, ch->field("mode"));
        ch->get("power_cap", p.power_cap);
        ch->finish();
    }

    if (auto q = top.child("quantization"))
    {
        auto &p = c.quantization;
        std::string policy(to_string(p.policy));
        q->get("policy", policy);
        p.policy = parse_quant(policy);
        q->get("blocks", p.blocks);
        q->get("b_rho", p.b_rho);
        q->get("b_s", p.b_s);
        q->get("b_h", p.b_h);
        std::optional<std::string> cb;
        q->get("codebook", cb);
        if (cb)
            p.codebook = resolve(*cb, base_dir);
        q->get("pilot_samples", p.pilot_samples);
        q->get("sign_lr", p.sign_lr);
        q->get("packing_iters", p.packing_iters);
        q->get("lloyd_iters", p.lloyd_iters);
        q->finish();
    }

    if (auto s = top.child("scheduling"))
    {
        auto &p = c.scheduling;
        std::string policy(scheduling::to_string(p.policy));
        s->get("policy", policy);
        try
        {
            p.policy = scheduling::parse_policy(policy);
        }
        catch (const InvalidInput &e)
        {
            throw ConfigError("field 'scheduling.policy': " + std::string(e.what()));
        }
        std::string mode = p.sample_mode == SampleMode::max_over_pool ? "max" : "random";
        s->get("sample_mode", mode);
        if (mode == "max")
            p.sample_mode = SampleMode::max_over_pool;
        else if (mode == "random")
            p.sample_mode = SampleMode::random_sample;
        else
            throw ConfigError("field 'scheduling.sample_mode' must be 'max' or 'random'");
        s->get("pool_size", p.pool_size);
        s->get("seed_samples", p.seed_samples);
        s->get("svm_c", p.svm_c);
        s->get("step0", p.step0);
        s->get("tau", p.tau);
        s->finish();
    }

    if (auto l = top.child("learner"))
    {
        auto &p = c.learner;
        l->get("architecture", p.architecture);
        l->get("hidden", p.hidden);
        l->get("lr", p.lr);
        l->get("batch_size", p.batch_size);
        l->get("init_scale", p.init_scale);
        if (auto d = l->child("dataset"))
        {
            auto &ds = p.dataset;
            d->get("kind", ds.kind);
            d->get("dim", ds.dim);
            d->get("offset", ds.offset);
            d->get("scale", ds.scale);
            d->get("train_per_device", ds.train_per_device);
            d->get("test_count", ds.test_count);
            std::optional<std::string> images;
            std::optional<std::string> labels;
            d->get("mnist_images", images);
            d->get("mnist_labels", labels);
            if (images)
                ds.mnist_images = resolve(*images, base_dir);
            if (labels)
                ds.mnist_labels = resolve(*labels, base_dir);
            std::optional<std::vector<int>> classes;
            d->get("classes", classes);
            if (classes)
            {
                if (classes->size() != 2)
                    throw ConfigError("field 'learner.dataset.classes' must list exactly two classes");
                ds.classes = std::make_pair((*classes)[0], (*classes)[1]);
            }
            d->finish();
        }
        l->finish();
    }

    if (auto s = top.child("sweep"))
    {
        auto &p = c.sweep;
        s->get("devices", p.devices);
        s->get("m_r", p.m_r);
        s->get("m_t", p.m_t);
        s->get("streams", p.streams);
        s->get("noise_variance", p.noise_variance);
        std::optional<std::vector<std::string>> modes;
        s->get("modes", modes);
        if (modes)
        {
            p.modes.clear();
            for (const auto &m : *modes)
                p.modes.push_back(parse_mode(m, s->field("modes")));
        }
        s->get("beamformers", p.beamformers);
        s->get("trials", p.trials);
        s->finish();
    }
    top.finish();

    validate(c);
    require_file(c.quantization.codebook, "quantization.codebook");
    require_file(c.learner.dataset.mnist_images, "learner.dataset.mnist_images");
    require_file(c.learner.dataset.mnist_labels, "learner.dataset.mnist_labels");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

std::string dump_config(const ExperimentConfig &c)
{
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["experiment"] = std::string(to_string(c.kind));
    j["devices"] = c.devices;
    j["rounds"] = c.rounds;
    j["seed"] = c.seed;
    if (c.output)
        j["output"] = c.output->string();

    const auto &ch = c.channel;
    j["channel"] = {{"mean_snr_db", ch.mean_snr_db}, {"fading", ch.fading},
                    {"resample_snr", ch.resample_snr}, {"m_r", ch.m_r},
                    {"m_t", ch.m_t},                   {"streams", ch.streams},
                    {"noise_variance", ch.noise_variance}, {"mode", mode_name(ch.mode)}};
    if (ch.power_cap)
        j["channel"]["power_cap"] = *ch.power_cap;

    const auto &q = c.quantization;
    j["quantization"] = {{"policy", std::string(to_string(q.policy))},
                         {"blocks", q.blocks},
                         {"b_rho", q.b_rho},
                         {"b_s", q.b_s},
                         {"b_h", q.b_h},
                         {"pilot_samples", q.pilot_samples},
                         {"sign_lr", q.sign_lr},
                         {"packing_iters", q.packing_iters},
                         {"lloyd_iters", q.lloyd_iters}};
    if (q.codebook)
        j["quantization"]["codebook"] = q.codebook->string();

    const auto &s = c.scheduling;
    j["scheduling"] = {{"policy", std::string(scheduling::to_string(s.policy))},
                       {"sample_mode", s.sample_mode == SampleMode::max_over_pool ? "max" : "random"},
                       {"pool_size", s.pool_size},
                       {"seed_samples", s.seed_samples},
                       {"svm_c", s.svm_c},
                       {"step0", s.step0},
                       {"tau", s.tau}};

    const auto &l = c.learner;
    const auto &d = l.dataset;
    json ds = {{"kind", d.kind},   {"dim", d.dim},
               {"offset", d.offset}, {"scale", d.scale},
               {"train_per_device", d.train_per_device}, {"test_count", d.test_count}};
    if (d.mnist_images)
        ds["mnist_images"] = d.mnist_images->string();
    if (d.mnist_labels)
        ds["mnist_labels"] = d.mnist_labels->string();
    if (d.classes)
        ds["classes"] = {d.classes->first, d.classes->second};
    j["learner"] = {{"architecture", l.architecture}, {"hidden", l.hidden},         {"lr", l.lr},
                    {"batch_size", l.batch_size},     {"init_scale", l.init_scale}, {"dataset", ds}};

    const auto &sw = c.sweep;
    std::vector<std::string> modes;
    for (auto m : sw.modes)
        modes.push_back(mode_name(m));
    j["sweep"] = {{"devices", sw.devices}, {"m_r", sw.m_r},
                  {"m_t", sw.m_t},         {"streams", sw.streams},
                  {"noise_variance", sw.noise_variance}, {"modes", modes},
                  {"beamformers", sw.beamformers},       {"trials", sw.trials}};
    return j.dump(2);
}

} // namespace edgeflow::harness
