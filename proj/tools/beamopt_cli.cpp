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

#include <beamopt.hpp>

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace beamopt;

namespace
{

enum ExitCode : int
{
    kOk = 0,
    kFailure = 1,
    kBadConfig = 2,
    kBadDataset = 3,
    kNanLoss = 4,
    kBadCheckpoint = 5,
    kBadCsv = 6,
};

struct Common
{
    std::string config;
    std::string dataset;
    std::vector<std::string> ckpts;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool desk = false;
};

std::size_t thread_count(const Common &c) { return c.threads ? std::max<std::size_t>(1, *c.threads) : default_threads(); }

ChannelDataset load_matching_dataset(const ExperimentConfig &cfg, const std::string &path)
{
    if (!fs::exists(path))
        throw DatasetError("dataset '" + path + "' does not exist");
    ChannelDataset ds = load_dataset(path);
    const auto &s = ds.spec;
    if (s.m_tx != cfg.channel.m_tx || s.n_ue != cfg.channel.n_ue || s.k_sc() != cfg.channel.k_sc())
        throw DimensionMismatch("dataset '" + path + "' has shape M=" + std::to_string(s.m_tx) +
                                " N=" + std::to_string(s.n_ue) + " K=" + std::to_string(s.k_sc()) +
                                " but the config expects M=" + std::to_string(cfg.channel.m_tx) +
                                " N=" + std::to_string(cfg.channel.n_ue) + " K=" + std::to_string(cfg.channel.k_sc()));
    return ds;
}

int cmd_generate(const Common &c, const std::string &split)
{
    const ExperimentConfig cfg = load_config(c.config, c.desk);
    const std::uint64_t base = c.seed.value_or(cfg.dataset_seed);
    // The test split draws from its own stream so it never overlaps training data.
    const bool test = split == "test";
    const std::uint64_t seed = test ? derive_seed(base, 0x7e57) : base;
    const std::size_t count = test ? cfg.test_samples : cfg.train_samples;
    const ChannelDataset ds = generate_dataset(cfg.channel, count, seed, thread_count(c));
    for (const auto &h : ds.samples)
        h.validate();
    save_dataset(ds, c.out);
    std::printf("wrote %zu samples (M=%zu N=%zu K=%zu) to %s\n", ds.size(), cfg.channel.m_tx, cfg.channel.n_ue,
                cfg.channel.k_sc(), c.out.c_str());
    std::printf("fingerprint: %016" PRIx64 "\n", ds.fingerprint);
    return kOk;
}

int cmd_train(const Common &c, const std::vector<std::string> &only)
{
    ExperimentConfig cfg = load_config(c.config, c.desk);
    if (c.seed)
        cfg.train.seed = *c.seed;
    const ChannelDataset ds = load_matching_dataset(cfg, c.dataset);
    fs::create_directories(c.out);

    int trained = 0;
    for (const std::string method : {"NNBF", "NNBF-P"})
    {
        if (!cfg.wants(method))
            continue;
        if (!only.empty() && std::find(only.begin(), only.end(), method) == only.end())
            continue;
        const ModelConfig mc = cfg.model_config(method == "NNBF-P");
        std::printf("training %s on %zu samples (%zu parameters)\n", method.c_str(), ds.size(),
                    init_params(mc, cfg.train.seed).parameter_count());
        const TrainResult res = train(mc, init_params(mc, cfg.train.seed), ds, cfg.train,
                                      [](std::size_t epoch, double tl, double vl)
                                      { std::printf("  epoch %4zu  train %.6f  val %.6f\n", epoch + 1, tl, vl); });
        const fs::path stem = fs::path(c.out) / (cfg.id + "-" + method);
        save_checkpoint(stem.string() + ".ckpt", mc, res.best);
        res.report.write_csv(stem.string() + "-report.csv");
        std::printf("  best epoch %zu, val loss %.6f, initial train loss %.6f -> %s.ckpt\n", res.report.best_epoch + 1,
                    res.report.best_val_loss, res.report.initial_train_loss, stem.string().c_str());
        ++trained;
    }
    if (trained == 0)
        std::printf("config requests no trainable methods; nothing to do\n");
    return kOk;
}

int cmd_eval(const Common &c)
{
    const ExperimentConfig cfg = load_config(c.config, c.desk);
    const ChannelDataset ds = load_matching_dataset(cfg, c.dataset);
    std::vector<std::string> baselines;
    for (const std::string m : {"ZF", "MMSE"})
        if (cfg.wants(m))
            baselines.push_back(m);
    std::vector<EvalModel> models;
    for (const auto &path : c.ckpts)
    {
        LoadedModel lm = load_checkpoint(path);
        if (lm.cfg.m_tx != cfg.channel.m_tx || lm.cfg.n_ue != cfg.channel.n_ue || lm.cfg.k_sc != cfg.channel.k_sc())
            throw CheckpointError("checkpoint '" + path + "' was trained for M=" + std::to_string(lm.cfg.m_tx) +
                                  " N=" + std::to_string(lm.cfg.n_ue) + " K=" + std::to_string(lm.cfg.k_sc) +
                                  ", incompatible with this config");
        models.push_back({std::move(lm.cfg), std::move(lm.params)});
    }
    const auto rows = evaluate(cfg.id, ds, cfg.snr_grid_db, baselines, models, cfg.p_max(), thread_count(c));
    write_results_csv(c.out, rows);
    for (const auto &r : rows)
        std::printf("%-8s %7.2f dB  %8.4f +- %.4f bps/Hz  (n=%zu)\n", r.method.c_str(), r.snr_db, r.se_mean, r.se_std, r.n);
    return kOk;
}

int cmd_plot(const std::string &csv, const std::string &out)
{
    const auto rows = read_results_csv(csv);
    std::ofstream os(out, std::ios::binary);
    os << render_svg(rows);
    if (!os)
        throw Error("cannot write '" + out + "'");
    std::printf("wrote %s\n", out.c_str());
    return kOk;
}

int cmd_verify(bool fault)
{
    VerifyOptions opt;
    if (fault)
        opt.gelu.inv_sqrt_2pi *= 1.01;
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_verify(opt);
    std::vector<std::string> failed;
    std::printf("%-52s %-6s %12s %10s %8s\n", "check", "status", "error", "limit", "time");
    for (const auto &r : results)
    {
        std::printf("%-52s %-6s %12.3e %10.1e %7.3fs\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.value,
                    r.threshold, r.seconds);
        if (!r.passed)
            failed.push_back(r.name);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (failed.empty())
    {
        std::printf("all %zu checks passed in %.2fs\n", results.size(), secs);
        return kOk;
    }
    std::fprintf(stderr, "%zu check(s) failed:\n", failed.size());
    for (const auto &f : failed)
        std::fprintf(stderr, "  %s\n", f.c_str());
    return kFailure;
}

int report(int code, const char *kind, const std::exception &e)
{
    std::fprintf(stderr, "beamopt: %s: %s\n", kind, e.what());
    return code;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"beamopt: multi-user MISO downlink beamforming toolkit"};
    app.require_subcommand(1);
    Common c;

    auto add_threads = [&](CLI::App *sub)
    {
        sub->add_option("--threads", c.threads, "Worker threads (default: BEAMOPT_THREADS or 1)");
    };

    std::string split = "train";
    auto *gen = app.add_subcommand("generate", "Draw a channel dataset");
    gen->add_option("--config", c.config, "Experiment config")->required();
    gen->add_option("--out", c.out, "Dataset file to write")->required();
    gen->add_option("--seed", c.seed, "Dataset seed (overrides the config)");
    gen->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
    gen->add_flag("--desk-scale", c.desk, "Apply the config's [desk] overrides");
    add_threads(gen);

    std::vector<std::string> only;
    auto *tr = app.add_subcommand("train", "Train NNBF and/or NNBF-P");
    tr->add_option("--config", c.config, "Experiment config")->required();
    tr->add_option("--dataset", c.dataset, "Training dataset")->required();
    tr->add_option("--out", c.out, "Output directory for checkpoints and reports")->required();
    tr->add_option("--seed", c.seed, "Training seed (overrides the config)");
    tr->add_option("--method", only, "Restrict to these methods")->check(CLI::IsMember({"NNBF", "NNBF-P"}));
    tr->add_flag("--desk-scale", c.desk, "Apply the config's [desk] overrides");
    add_threads(tr);

    auto *ev = app.add_subcommand("eval", "Paired SNR sweep of baselines and trained models");
    ev->add_option("--config", c.config, "Experiment config")->required();
    ev->add_option("--dataset", c.dataset, "Test dataset")->required();
    ev->add_option("--ckpt", c.ckpts, "Model checkpoint (repeatable)");
    ev->add_option("--out", c.out, "Results CSV to write")->required();
    ev->add_flag("--desk-scale", c.desk, "Apply the config's [desk] overrides");
    add_threads(ev);

    std::string csv;
    auto *pl = app.add_subcommand("plot", "Render a results CSV as an SVG line chart");
    pl->add_option("--csv", csv, "Results CSV")->required();
    pl->add_option("--out", c.out, "SVG file to write")->required();

    bool fault = false;
    auto *ve = app.add_subcommand("verify", "Run the fast invariant suite");
    ve->add_flag("--inject-gelu-fault", fault)->group("");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*gen)
            return cmd_generate(c, split);
        if (*tr)
            return cmd_train(c, only);
        if (*ev)
            return cmd_eval(c);
        if (*pl)
            return cmd_plot(csv, c.out);
        return cmd_verify(fault);
    }
    catch (const ConfigError &e)
    {
        return report(kBadConfig, ("invalid config (" + e.field() + ")").c_str(), e);
    }
    catch (const EmptyDataset &e)
    {
        return report(kBadConfig, "empty dataset", e);
    }
    catch (const NanLoss &e)
    {
        return report(kNanLoss, "training aborted", e);
    }
    catch (const CheckpointError &e)
    {
        return report(kBadCheckpoint, "incompatible checkpoint", e);
    }
    catch (const CsvError &e)
    {
        return report(kBadCsv, "malformed results", e);
    }
    catch (const DatasetError &e)
    {
        return report(kBadDataset, "dataset", e);
    }
    catch (const DimensionMismatch &e)
    {
        return report(kBadDataset, "shape mismatch", e);
    }
    catch (const std::exception &e)
    {
        return report(kFailure, "error", e);
    }
}
