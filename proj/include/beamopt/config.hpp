// SPDX-License-Identifier: Apache-2.0
//
// beamopt: multi-user MISO downlink beamforming toolkit
// Copyright (C) 2026 The beamopt authors
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

#include "channel.hpp"
#include "error.hpp"
#include "models.hpp"
#include "trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

// Experiment configuration files.
//
//   # comment
//   schema = 1
//   [experiment]  id, profile, delay_spread_ns, modulation, m_tx, n_ue,
//                 num_rb, subcarriers, scs_hz, doppler_hz, jitter_db,
//                 jitter_distribution, snr_grid_db, methods, snr_range_override
//   [dataset]     train_samples, test_samples, seed
//   [model]       fc_hidden_bf, fc_hidden_pw, wideband, input_scaling
//   [train]       epochs, batch_size, lr, lr_decay, seed, val_fraction,
//                 early_stop_patience, snr_policy, snr_db, snr_min_db, snr_max_db
//   [desk]        section.key = value overrides applied by --desk-scale
//
// Lists are comma separated. Unknown sections or keys are errors.
namespace beamopt
{

inline constexpr int kConfigSchema = 1;
inline const std::vector<std::string> kKnownMethods = {"ZF", "MMSE", "NNBF", "NNBF-P"};

struct ExperimentConfig
{
    std::string id = "experiment";
    ChannelSpec channel;
    std::string modulation = "QPSK"; // carried into labels only
    std::vector<double> snr_grid_db = {-15, -10, -5, -2.5, 0, 5, 10, 20, 30, 40, 50};
    std::vector<std::string> methods = kKnownMethods;
    bool snr_range_override = false;

    std::size_t train_samples = 4096;
    std::size_t test_samples = 1024;
    std::uint64_t dataset_seed = 1;

    std::vector<std::size_t> fc_hidden_bf = {1024};
    std::vector<std::size_t> fc_hidden_pw = {1024};
    bool wideband = false;
    InputScaling input_scaling = InputScaling::NoiseNormalized;

    TrainConfig train;

    std::vector<std::pair<std::string, std::string>> desk; // "section.key" -> value

    double p_max() const { return static_cast<double>(channel.n_ue); }

    bool wants(const std::string &method) const
    {
        return std::find(methods.begin(), methods.end(), method) != methods.end();
    }

    ModelConfig model_config(bool joint_power) const
    {
        ModelConfig m;
        m.m_tx = channel.m_tx;
        m.n_ue = channel.n_ue;
        m.k_sc = channel.k_sc();
        m.fc_hidden_bf = fc_hidden_bf;
        m.fc_hidden_pw = fc_hidden_pw;
        m.joint_power = joint_power;
        m.wideband = wideband;
        m.input_scaling = input_scaling;
        m.p_max = p_max();
        return m;
    }

    void validate() const
    {
        if (id.empty() || id.find_first_of(", \t\n") != std::string::npos)
            throw ConfigError("experiment.id", "must be non-empty without commas or whitespace");
        channel.validate();
        if (channel.m_tx < channel.n_ue)
            throw ConfigError("experiment.m_tx", "must be at least n_ue");
        if (modulation != "QPSK" && modulation != "16QAM")
            throw ConfigError("experiment.modulation", "expected QPSK or 16QAM");
        if (snr_grid_db.empty())
            throw ConfigError("experiment.snr_grid_db", "must list at least one SNR");
        if (!snr_range_override)
            for (double s : snr_grid_db)
                if (s < -15.0 || s > 50.0)
                    throw ConfigError("experiment.snr_grid_db", "SNR outside [-15, 50] dB needs snr_range_override = true");
        if (methods.empty())
            throw ConfigError("experiment.methods", "must list at least one method");
        for (const auto &m : methods)
            if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end())
                throw ConfigError("experiment.methods", "unknown method '" + m + "'");
        if (train_samples == 0 || test_samples == 0)
            throw ConfigError("dataset", "sample counts must be positive");
        train.validate();
        if (wants("NNBF") || wants("NNBF-P"))
            model_config(true).validate();
    }

    friend bool operator==(const ExperimentConfig &, const ExperimentConfig &) = default;
};

namespace detail
{
inline std::string trim(std::string s)
{
    s.erase(0, s.find_first_not_of(" \t\r"));
    const auto end = s.find_last_not_of(" \t\r");
    s.erase(end == std::string::npos ? 0 : end + 1);
    return s;
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

inline double to_double(const std::string &field, const std::string &v)
{
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
        throw ConfigError(field, "'" + v + "' is not a finite number");
    return x;
}

inline std::uint64_t to_uint(const std::string &field, const std::string &v)
{
    std::uint64_t x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size())
        throw ConfigError(field, "'" + v + "' is not a non-negative integer");
    return x;
}

inline bool to_bool(const std::string &field, const std::string &v)
{
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    throw ConfigError(field, "'" + v + "' is not a boolean");
}

inline std::string num(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

template <typename T>
std::string join(const std::vector<T> &v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (i)
            out += ", ";
        if constexpr (std::is_same_v<T, std::string>)
            out += v[i];
        else if constexpr (std::is_floating_point_v<T>)
            out += num(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

inline void apply_setting(ExperimentConfig &c, const std::string &section, const std::string &key, const std::string &v)
{
    const std::string f = section + "." + key;
    auto sizes = [&]
    {
        std::vector<std::size_t> out;
        for (const auto &s : split_list(v))
            out.push_back(static_cast<std::size_t>(to_uint(f, s)));
        return out;
    };
    if (section == "experiment")
    {
        if (key == "id")
            c.id = v;
        else if (key == "profile")
        {
            try
            {
                c.channel.profile = TdlProfile::load(profile_from_string(v));
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(f, e.what());
            }
        }
        else if (key == "delay_spread_ns")
            c.channel.delay_spread_ns = to_double(f, v);
        else if (key == "modulation")
            c.modulation = v;
        else if (key == "m_tx")
            c.channel.m_tx = to_uint(f, v);
        else if (key == "n_ue")
            c.channel.n_ue = to_uint(f, v);
        else if (key == "num_rb")
            c.channel.num_rb = to_uint(f, v);
        else if (key == "subcarriers")
            c.channel.subcarriers = to_uint(f, v);
        else if (key == "scs_hz")
            c.channel.scs_hz = to_double(f, v);
        else if (key == "doppler_hz")
            c.channel.doppler_hz = to_double(f, v);
        else if (key == "jitter_db")
            c.channel.jitter_db = to_double(f, v);
        else if (key == "jitter_distribution")
        {
            if (v != "gaussian")
                throw ConfigError(f, "only 'gaussian' is supported");
            c.channel.jitter_dist = JitterDistribution::Gaussian;
        }
        else if (key == "snr_grid_db")
        {
            c.snr_grid_db.clear();
            for (const auto &s : split_list(v))
                c.snr_grid_db.push_back(to_double(f, s));
        }
        else if (key == "methods")
            c.methods = split_list(v);
        else if (key == "snr_range_override")
            c.snr_range_override = to_bool(f, v);
        else
            throw ConfigError(f, "unknown key");
    }
    else if (section == "dataset")
    {
        if (key == "train_samples")
            c.train_samples = to_uint(f, v);
        else if (key == "test_samples")
            c.test_samples = to_uint(f, v);
        else if (key == "seed")
            c.dataset_seed = to_uint(f, v);
        else
            throw ConfigError(f, "unknown key");
    }
    else if (section == "model")
    {
        if (key == "fc_hidden_bf")
            c.fc_hidden_bf = sizes();
        else if (key == "fc_hidden_pw")
            c.fc_hidden_pw = sizes();
        else if (key == "wideband")
            c.wideband = to_bool(f, v);
        else if (key == "input_scaling")
        {
            if (v == "raw")
                c.input_scaling = InputScaling::Raw;
            else if (v == "noise_normalized")
                c.input_scaling = InputScaling::NoiseNormalized;
            else
                throw ConfigError(f, "expected raw or noise_normalized");
        }
        else
            throw ConfigError(f, "unknown key");
    }
    else if (section == "train")
    {
        auto &t = c.train;
        if (key == "epochs")
            t.epochs = to_uint(f, v);
        else if (key == "batch_size")
            t.batch_size = to_uint(f, v);
        else if (key == "lr")
            t.lr = to_double(f, v);
        else if (key == "lr_decay")
            t.lr_decay = to_double(f, v);
        else if (key == "seed")
            t.seed = to_uint(f, v);
        else if (key == "val_fraction")
            t.val_fraction = to_double(f, v);
        else if (key == "early_stop_patience")
            t.early_stop_patience = to_uint(f, v);
        else if (key == "snr_policy")
        {
            if (v == "fixed")
                t.snr_policy = SnrPolicy::Fixed;
            else if (v == "uniform")
                t.snr_policy = SnrPolicy::Uniform;
            else
                throw ConfigError(f, "expected fixed or uniform");
        }
        else if (key == "snr_db")
            t.snr_db = to_double(f, v);
        else if (key == "snr_min_db")
            t.snr_min_db = to_double(f, v);
        else if (key == "snr_max_db")
            t.snr_max_db = to_double(f, v);
        else
            throw ConfigError(f, "unknown key");
    }
    else
    {
        throw ConfigError(section, "unknown section");
    }
}
} // namespace detail

// Applies the [desk] overrides in file order.
inline ExperimentConfig desk_scaled(ExperimentConfig c)
{
    for (const auto &[qualified, value] : c.desk)
    {
        const auto dot = qualified.find('.');
        detail::apply_setting(c, qualified.substr(0, dot), qualified.substr(dot + 1), value);
    }
    c.validate();
    return c;
}

inline ExperimentConfig parse_config(const std::string &text)
{
    ExperimentConfig c;
    std::istringstream is(text);
    std::string line, section;
    bool have_schema = false;
    std::size_t lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "dataset" && section != "model" && section != "train" &&
                section != "desk")
                throw ConfigError(section, "unknown section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
        {
            if (key != "schema")
                throw ConfigError(key, "only 'schema' may appear before the first section");
            if (detail::to_uint("schema", value) != kConfigSchema)
                throw ConfigError("schema", "unsupported schema version " + value + " (expected " +
                                                std::to_string(kConfigSchema) + ")");
            have_schema = true;
        }
        else if (section == "desk")
        {
            const auto dot = key.find('.');
            if (dot == std::string::npos)
                throw ConfigError("desk." + key, "override keys must be section.key");
            // Validate the target now so typos surface without --desk-scale.
            ExperimentConfig probe = c;
            detail::apply_setting(probe, key.substr(0, dot), key.substr(dot + 1), value);
            c.desk.emplace_back(key, value);
        }
        else
        {
            detail::apply_setting(c, section, key, value);
        }
    }
    if (!have_schema)
        throw ConfigError("schema", "missing schema version");
    c.validate();
    return c;
}

inline std::string serialize_config(const ExperimentConfig &c)
{
    using detail::join;
    using detail::num;
    std::ostringstream os;
    os << "schema = " << kConfigSchema << "\n\n[experiment]\n"
       << "id = " << c.id << "\n"
       << "profile = " << c.channel.profile.name() << "\n"
       << "delay_spread_ns = " << num(c.channel.delay_spread_ns) << "\n"
       << "modulation = " << c.modulation << "\n"
       << "m_tx = " << c.channel.m_tx << "\n"
       << "n_ue = " << c.channel.n_ue << "\n"
       << "num_rb = " << c.channel.num_rb << "\n"
       << "subcarriers = " << c.channel.subcarriers << "\n"
       << "scs_hz = " << num(c.channel.scs_hz) << "\n"
       << "doppler_hz = " << num(c.channel.doppler_hz) << "\n"
       << "jitter_db = " << num(c.channel.jitter_db) << "\n"
       << "jitter_distribution = gaussian\n"
       << "snr_grid_db = " << join(c.snr_grid_db) << "\n"
       << "methods = " << join(c.methods) << "\n"
       << "snr_range_override = " << (c.snr_range_override ? "true" : "false") << "\n\n[dataset]\n"
       << "train_samples = " << c.train_samples << "\n"
       << "test_samples = " << c.test_samples << "\n"
       << "seed = " << c.dataset_seed << "\n\n[model]\n"
       << "fc_hidden_bf = " << join(c.fc_hidden_bf) << "\n"
       << "fc_hidden_pw = " << join(c.fc_hidden_pw) << "\n"
       << "wideband = " << (c.wideband ? "true" : "false") << "\n"
       << "input_scaling = " << (c.input_scaling == InputScaling::Raw ? "raw" : "noise_normalized") << "\n\n[train]\n"
       << "epochs = " << c.train.epochs << "\n"
       << "batch_size = " << c.train.batch_size << "\n"
       << "lr = " << num(c.train.lr) << "\n"
       << "lr_decay = " << num(c.train.lr_decay) << "\n"
       << "seed = " << c.train.seed << "\n"
       << "val_fraction = " << num(c.train.val_fraction) << "\n"
       << "early_stop_patience = " << c.train.early_stop_patience << "\n"
       << "snr_policy = " << (c.train.snr_policy == SnrPolicy::Fixed ? "fixed" : "uniform") << "\n"
       << "snr_db = " << num(c.train.snr_db) << "\n"
       << "snr_min_db = " << num(c.train.snr_min_db) << "\n"
       << "snr_max_db = " << num(c.train.snr_max_db) << "\n";
    if (!c.desk.empty())
    {
        os << "\n[desk]\n";
        for (const auto &[k, v] : c.desk)
            os << k << " = " << v << "\n";
    }
    return os.str();
}

inline ExperimentConfig load_config(const std::filesystem::path &path, bool desk_scale = false)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError("config", "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    ExperimentConfig c = parse_config(ss.str());
    return desk_scale ? desk_scaled(std::move(c)) : c;
}

} // namespace beamopt
