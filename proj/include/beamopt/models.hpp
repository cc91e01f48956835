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

#include "autodiff.hpp"
#include "binary_io.hpp"
#include "channel.hpp"
#include "checkpoint.hpp"
#include "error.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace beamopt
{

struct BlockSpec
{
    std::size_t c_in = 0, c_out = 0;
    bool downsample = false;

    friend bool operator==(const BlockSpec &, const BlockSpec &) = default;
};

// How the complex channel is presented to the network. NoiseNormalized
// divides UE n's channel by sigma_n so per-UE SNR is visible in the input.
enum class InputScaling
{
    Raw,
    NoiseNormalized,
};

struct ModelConfig
{
    std::size_t m_tx = 4, n_ue = 4, k_sc = 48;
    std::vector<BlockSpec> backbone = {{2, 16, false}, {16, 32, true}, {32, 32, true}};
    std::size_t kernel = 3;
    std::vector<std::size_t> fc_hidden_bf = {1024};
    std::vector<std::size_t> fc_hidden_pw = {1024};
    bool joint_power = true;   // NNBF-P when set, NNBF otherwise
    bool wideband = false;     // one direction per UE shared by all subcarriers
    InputScaling input_scaling = InputScaling::NoiseNormalized;
    double p_max = 4.0;

    std::string method_name() const { return joint_power ? "NNBF-P" : "NNBF"; }

    std::size_t feature_length() const
    {
        std::size_t L = k_sc;
        for (const auto &b : backbone)
            if (b.downsample)
                L /= 2;
        return L;
    }

    // Width of the first FC layer: N*M antenna pairs times C*L features.
    std::size_t flatten_width() const { return n_ue * m_tx * backbone.back().c_out * feature_length(); }

    std::size_t direction_outputs() const { return 2 * m_tx * n_ue * (wideband ? 1 : k_sc); }

    void validate() const
    {
        if (m_tx == 0 || n_ue == 0 || k_sc == 0)
            throw ConfigError("model", "M, N and K must be positive");
        if (backbone.empty())
            throw ConfigError("model.backbone", "at least one basic block is required");
        if (backbone.front().c_in != 2)
            throw ConfigError("model.backbone", "first block must take 2 (I/Q) input channels");
        std::size_t divisor = 1;
        for (std::size_t i = 0; i < backbone.size(); ++i)
        {
            if (backbone[i].c_in == 0 || backbone[i].c_out == 0)
                throw ConfigError("model.backbone", "channel counts must be positive");
            if (i > 0 && backbone[i].c_in != backbone[i - 1].c_out)
                throw ConfigError("model.backbone", "block " + std::to_string(i) + " input channels do not chain");
            if (backbone[i].downsample)
                divisor *= 2;
        }
        if (k_sc % divisor != 0)
            throw ConfigError("model.backbone", "K=" + std::to_string(k_sc) + " is not divisible by the downsampling factor " +
                                                    std::to_string(divisor));
        if (backbone.back().c_out * feature_length() != 8 * k_sc)
            throw ConfigError("model.backbone", "final C*L must equal 8K per antenna pair");
        if (kernel == 0 || kernel % 2 == 0)
            throw ConfigError("model.kernel", "kernel size must be odd");
        if (!(p_max > 0.0))
            throw ConfigError("model.p_max", "must be positive");
        for (std::size_t w : fc_hidden_bf)
            if (w == 0)
                throw ConfigError("model.fc_hidden", "widths must be positive");
        for (std::size_t w : fc_hidden_pw)
            if (w == 0)
                throw ConfigError("model.fc_hidden", "widths must be positive");
    }

    std::string serialize() const
    {
        std::ostringstream os;
        os.precision(17);
        os << "m_tx = " << m_tx << "\n"
           << "n_ue = " << n_ue << "\n"
           << "k_sc = " << k_sc << "\n"
           << "backbone =";
        for (const auto &b : backbone)
            os << " " << b.c_in << ":" << b.c_out << ":" << (b.downsample ? 1 : 0);
        os << "\nkernel = " << kernel << "\nfc_hidden_bf =";
        for (auto w : fc_hidden_bf)
            os << " " << w;
        os << "\nfc_hidden_pw =";
        for (auto w : fc_hidden_pw)
            os << " " << w;
        os << "\njoint_power = " << (joint_power ? 1 : 0) << "\n"
           << "wideband = " << (wideband ? 1 : 0) << "\n"
           << "input_scaling = " << (input_scaling == InputScaling::Raw ? "raw" : "noise_normalized") << "\n"
           << "p_max = " << p_max << "\n";
        return os.str();
    }

    static ModelConfig parse(const std::string &text)
    {
        std::map<std::string, std::string> kv;
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line))
        {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                continue;
            auto trim = [](std::string s)
            {
                s.erase(0, s.find_first_not_of(" \t"));
                s.erase(s.find_last_not_of(" \t\r") + 1);
                return s;
            };
            kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        auto need = [&](const char *key) -> const std::string &
        {
            auto it = kv.find(key);
            if (it == kv.end())
                throw ConfigError(std::string("model.") + key, "missing");
            return it->second;
        };
        auto sizes = [](const std::string &s)
        {
            std::vector<std::size_t> out;
            std::istringstream ss(s);
            std::size_t v;
            while (ss >> v)
                out.push_back(v);
            return out;
        };
        ModelConfig c;
        try
        {
            c.m_tx = std::stoul(need("m_tx"));
            c.n_ue = std::stoul(need("n_ue"));
            c.k_sc = std::stoul(need("k_sc"));
            c.backbone.clear();
            std::istringstream bs(need("backbone"));
            std::string tok;
            while (bs >> tok)
            {
                BlockSpec b;
                char c1 = 0, c2 = 0;
                int ds = 0;
                std::istringstream ts(tok);
                if (!(ts >> b.c_in >> c1 >> b.c_out >> c2 >> ds) || c1 != ':' || c2 != ':')
                    throw ConfigError("model.backbone", "bad block '" + tok + "'");
                b.downsample = ds != 0;
                c.backbone.push_back(b);
            }
            c.kernel = std::stoul(need("kernel"));
            c.fc_hidden_bf = sizes(need("fc_hidden_bf"));
            c.fc_hidden_pw = sizes(need("fc_hidden_pw"));
            c.joint_power = need("joint_power") == "1";
            c.wideband = need("wideband") == "1";
            const auto &scaling = need("input_scaling");
            if (scaling == "raw")
                c.input_scaling = InputScaling::Raw;
            else if (scaling == "noise_normalized")
                c.input_scaling = InputScaling::NoiseNormalized;
            else
                throw ConfigError("model.input_scaling", "unknown value '" + scaling + "'");
            c.p_max = std::stod(need("p_max"));
        }
        catch (const std::logic_error &e)
        {
            throw ConfigError("model", std::string("unparsable value: ") + e.what());
        }
        c.validate();
        return c;
    }

    friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

// Trainable tensors (backbone, beamforming head, power head) plus the
// batch-norm running statistics.
class ModelParams
{
public:
    std::vector<NamedTensor> params;
    std::vector<NamedTensor> buffers;

    ad::Tensor &get(const std::string &name)
    {
        for (auto *list : {&params, &buffers})
            for (auto &nt : *list)
                if (nt.name == name)
                    return nt.tensor;
        throw Error("ModelParams: no tensor named '" + name + "'");
    }
    const ad::Tensor &get(const std::string &name) const { return const_cast<ModelParams *>(this)->get(name); }

    std::vector<ad::Tensor> trainable() const
    {
        std::vector<ad::Tensor> out;
        for (const auto &nt : params)
            out.push_back(nt.tensor);
        return out;
    }

    void zero_grad()
    {
        for (auto &nt : params)
            nt.tensor.zero_grad();
    }

    ModelParams clone() const
    {
        ModelParams c;
        for (const auto &nt : params)
            c.params.push_back({nt.name, nt.tensor.clone()});
        for (const auto &nt : buffers)
            c.buffers.push_back({nt.name, nt.tensor.clone()});
        return c;
    }

    // Copy for concurrent inference: nothing requires a gradient, so forward
    // passes record no ops and never touch shared gradient buffers.
    ModelParams frozen() const
    {
        ModelParams c;
        for (const auto &nt : params)
            c.params.push_back({nt.name, nt.tensor.detached()});
        for (const auto &nt : buffers)
            c.buffers.push_back({nt.name, nt.tensor.detached()});
        return c;
    }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (const auto &nt : params)
            n += nt.tensor.size();
        return n;
    }
};

namespace detail
{
inline std::uint64_t name_seed(std::uint64_t seed, const std::string &name)
{
    io::Fnv1a h;
    h.bytes(name.data(), name.size());
    return derive_seed(seed, h.digest());
}

inline ad::Tensor kaiming(const std::string &name, ad::Shape shape, std::size_t fan_in, std::uint64_t seed)
{
    Rng rng(name_seed(seed, name));
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    std::vector<double> v(ad::numel(shape));
    for (auto &x : v)
        x = gauss(rng);
    return ad::Tensor(std::move(shape), std::move(v), true);
}

inline void add_head(ModelParams &mp, const std::string &prefix, std::size_t in, const std::vector<std::size_t> &hidden,
                     std::size_t out, std::uint64_t seed)
{
    std::vector<std::size_t> widths = hidden;
    widths.push_back(out);
    std::size_t prev = in;
    for (std::size_t j = 0; j < widths.size(); ++j)
    {
        const std::string base = prefix + "." + std::to_string(j);
        mp.params.push_back({base + ".weight", kaiming(base + ".weight", {widths[j], prev}, prev, seed)});
        mp.params.push_back({base + ".bias", ad::Tensor::zeros({widths[j]}, true)});
        prev = widths[j];
    }
}
} // namespace detail

// Kaiming-normal weights (std sqrt(2 / fan_in)), zero biases and BN shifts,
// unit BN scales. Each tensor draws from a stream keyed by its name, so the
// shared parts of NNBF and NNBF-P initialize identically.
inline ModelParams init_params(const ModelConfig &cfg, std::uint64_t seed)
{
    cfg.validate();
    ModelParams mp;
    for (std::size_t i = 0; i < cfg.backbone.size(); ++i)
    {
        const auto &b = cfg.backbone[i];
        const std::string base = "backbone." + std::to_string(i);
        mp.params.push_back({base + ".conv.weight",
                             detail::kaiming(base + ".conv.weight", {b.c_out, b.c_in, cfg.kernel}, b.c_in * cfg.kernel, seed)});
        mp.params.push_back({base + ".bn.gamma", ad::Tensor::full({b.c_out}, 1.0, true)});
        mp.params.push_back({base + ".bn.beta", ad::Tensor::zeros({b.c_out}, true)});
        mp.buffers.push_back({base + ".bn.running_mean", ad::Tensor::zeros({b.c_out})});
        mp.buffers.push_back({base + ".bn.running_var", ad::Tensor::full({b.c_out}, 1.0)});
    }
    detail::add_head(mp, "head_bf", cfg.flatten_width(), cfg.fc_hidden_bf, cfg.direction_outputs(), seed);
    if (cfg.joint_power)
        detail::add_head(mp, "head_pw", cfg.flatten_width(), cfg.fc_hidden_pw, cfg.n_ue, seed);
    return mp;
}

// Complex channels as a (B*N*M, 2, K) I/Q tensor; row (b*N + n)*M + m holds
// antenna pair (n, m) of sample b.
inline ad::Tensor make_input(const ModelConfig &cfg, std::span<const ChannelMatrix *const> channels,
                             std::span<const std::vector<double>> sigma2)
{
    const std::size_t B = channels.size(), M = cfg.m_tx, N = cfg.n_ue, K = cfg.k_sc;
    if (sigma2.size() != B)
        throw DimensionMismatch("make_input: one noise vector per sample required");
    std::vector<double> v(B * N * M * 2 * K);
    for (std::size_t b = 0; b < B; ++b)
    {
        const auto &h = *channels[b];
        if (h.m_tx != M || h.n_ue != N || h.k_sc != K)
            throw DimensionMismatch("make_input: channel is " + std::to_string(h.m_tx) + "x" + std::to_string(h.n_ue) +
                                    "x" + std::to_string(h.k_sc) + ", model expects " + std::to_string(M) + "x" +
                                    std::to_string(N) + "x" + std::to_string(K));
        for (std::size_t n = 0; n < N; ++n)
        {
            const double g = cfg.input_scaling == InputScaling::NoiseNormalized ? 1.0 / std::sqrt(sigma2[b].at(n)) : 1.0;
            for (std::size_t m = 0; m < M; ++m)
            {
                double *row = &v[((b * N + n) * M + m) * 2 * K];
                for (std::size_t k = 0; k < K; ++k)
                {
                    row[k] = g * h(k, m, n).real();
                    row[K + k] = g * h(k, m, n).imag();
                }
            }
        }
    }
    return ad::Tensor({B * N * M, 2, K}, std::move(v));
}

// conv1d -> batchnorm1d -> GELU; downsampling blocks use stride 2. The conv
// has no bias: batch norm subtracts the channel mean, which would cancel it.
inline ad::Tensor basic_block(ad::Tape &tape, const ad::Tensor &x, ModelParams &mp, std::size_t index, bool downsample,
                              ad::Mode mode, std::size_t kernel = 3)
{
    const std::string base = "backbone." + std::to_string(index);
    const ad::Tensor &w = mp.get(base + ".conv.weight");
    ad::Tensor y = ad::conv1d(tape, x, w, ad::Tensor::zeros({w.dim(0)}), downsample ? 2 : 1, kernel / 2);
    y = ad::batchnorm1d(tape, y, mp.get(base + ".bn.gamma"), mp.get(base + ".bn.beta"), mp.get(base + ".bn.running_mean"),
                        mp.get(base + ".bn.running_var"), mode);
    return ad::gelu(tape, y);
}

namespace detail
{
inline ad::Tensor run_head(ad::Tape &tape, ad::Tensor x, ModelParams &mp, const std::string &prefix, std::size_t layers)
{
    for (std::size_t j = 0; j < layers; ++j)
    {
        const std::string base = prefix + "." + std::to_string(j);
        x = ad::linear(tape, x, mp.get(base + ".weight"), mp.get(base + ".bias"));
        if (j + 1 < layers)
            x = ad::gelu(tape, x);
    }
    return x;
}
} // namespace detail

struct ModelOutput
{
    ad::Tensor directions; // (B, 2*K*M*N), unit norm per (k, n)
    ad::Tensor power;      // (B, N), sums to p_max
};

inline ModelOutput forward(ad::Tape &tape, const ModelConfig &cfg, ModelParams &mp, const ad::Tensor &input,
                           ad::Mode mode)
{
    const std::size_t pairs = cfg.n_ue * cfg.m_tx;
    if (input.rank() != 3 || input.dim(1) != 2 || input.dim(2) != cfg.k_sc || input.dim(0) % pairs != 0)
        throw DimensionMismatch("forward: input must be (B*N*M, 2, K), got " + ad::shape_string(input.shape()));
    const std::size_t B = input.dim(0) / pairs;

    ad::Tensor x = input;
    for (std::size_t i = 0; i < cfg.backbone.size(); ++i)
        x = basic_block(tape, x, mp, i, cfg.backbone[i].downsample, mode, cfg.kernel);
    const ad::Tensor features = ad::flatten(tape, x, pairs);

    ad::Tensor raw = detail::run_head(tape, features, mp, "head_bf", cfg.fc_hidden_bf.size() + 1);
    ad::Tensor directions;
    if (cfg.wideband)
        directions = ad::tile_rows(tape, ad::normalize_directions(tape, raw, 1, cfg.m_tx, cfg.n_ue), cfg.k_sc);
    else
        directions = ad::normalize_directions(tape, raw, cfg.k_sc, cfg.m_tx, cfg.n_ue);

    ad::Tensor power;
    if (cfg.joint_power)
    {
        ad::Tensor logits = detail::run_head(tape, features, mp, "head_pw", cfg.fc_hidden_pw.size() + 1);
        power = ad::scale(tape, ad::softmax(tape, logits), cfg.p_max);
    }
    else
    {
        power = ad::Tensor::full({B, cfg.n_ue}, cfg.p_max / static_cast<double>(cfg.n_ue));
    }
    return {directions, power};
}

inline void save_checkpoint(const std::filesystem::path &path, const ModelConfig &cfg, const ModelParams &mp)
{
    TensorContainer c{cfg.serialize(), {}};
    for (const auto &nt : mp.params)
        c.tensors.push_back(nt);
    for (const auto &nt : mp.buffers)
        c.tensors.push_back(nt);
    save_tensors(path, c);
}

struct LoadedModel
{
    ModelConfig cfg;
    ModelParams params;
};

// Loads and checks every tensor against the shapes its config implies.
inline LoadedModel load_checkpoint(const std::filesystem::path &path)
{
    TensorContainer c = load_tensors(path);
    LoadedModel out;
    try
    {
        out.cfg = ModelConfig::parse(c.metadata);
    }
    catch (const ConfigError &e)
    {
        throw CheckpointError("checkpoint '" + path.string() + "': bad model config: " + e.what());
    }
    ModelParams expected = init_params(out.cfg, 0);
    if (c.tensors.size() != expected.params.size() + expected.buffers.size())
        throw CheckpointError("checkpoint '" + path.string() + "': tensor count does not match its model config");
    std::size_t i = 0;
    for (auto *list : {&expected.params, &expected.buffers})
        for (auto &nt : *list)
        {
            const auto &got = c.tensors[i++];
            if (got.name != nt.name || got.tensor.shape() != nt.tensor.shape())
                throw CheckpointError("checkpoint '" + path.string() + "': tensor '" + got.name + "' " +
                                      ad::shape_string(got.tensor.shape()) + " does not match expected '" + nt.name +
                                      "' " + ad::shape_string(nt.tensor.shape()));
            std::copy(got.tensor.data().begin(), got.tensor.data().end(), nt.tensor.data().begin());
        }
    out.params = std::move(expected);
    return out;
}

} // namespace beamopt
