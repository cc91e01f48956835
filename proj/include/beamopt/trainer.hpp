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
#include "dataset.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "rng.hpp"
#include "sum_rate_loss.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

// Unsupervised training: the only signal is the sum-rate of the network's
// own outputs on each channel, so no reference beamformer is ever consumed.
namespace beamopt
{

enum class SnrPolicy
{
    Fixed,   // every batch at snr_db
    Uniform, // one nominal SNR per batch, uniform over [snr_min_db, snr_max_db]
};

struct TrainConfig
{
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double lr_decay = 1.0; // per-epoch multiplicative factor
    std::uint64_t seed = 1;
    double val_fraction = 0.1;
    std::size_t early_stop_patience = 20;
    SnrPolicy snr_policy = SnrPolicy::Uniform;
    double snr_db = 5.0;
    double snr_min_db = -15.0;
    double snr_max_db = 50.0;

    void validate() const
    {
        if (epochs == 0)
            throw ConfigError("train.epochs", "must be at least 1");
        if (batch_size == 0)
            throw ConfigError("train.batch_size", "must be at least 1");
        if (!(lr >= 0.0))
            throw ConfigError("train.lr", "must be non-negative");
        if (!(lr_decay > 0.0))
            throw ConfigError("train.lr_decay", "must be positive");
        if (!(val_fraction > 0.0 && val_fraction < 1.0))
            throw ConfigError("train.val_fraction", "must lie strictly between 0 and 1");
        if (!(snr_min_db <= snr_max_db))
            throw ConfigError("train.snr_min_db", "must not exceed snr_max_db");
    }

    friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

struct TrainReport
{
    std::vector<double> train_loss; // per epoch, mean over the epoch's batches
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
    double initial_train_loss = 0.0; // train-mode loss before the first update
    double wall_time_s = 0.0;

    // epoch,train_loss,val_loss
    void write_csv(const std::filesystem::path &path) const
    {
        std::ofstream os(path, std::ios::trunc);
        if (!os)
            throw Error("cannot write training report '" + path.string() + "'");
        os << "epoch,train_loss,val_loss\n";
        char buf[96];
        for (std::size_t e = 0; e < train_loss.size(); ++e)
        {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", e, train_loss[e], val_loss[e]);
            os << buf;
        }
    }
};

struct TrainResult
{
    ModelParams best;
    TrainReport report;
};

struct DataSplit
{
    std::vector<std::size_t> train, val;
};

// Seeded shuffle, then the first round(val_fraction * n) indices (at least
// one, at most n - 1) become validation.
inline DataSplit split_indices(std::size_t n, double val_fraction, std::uint64_t seed)
{
    if (n < 2)
        throw EmptyDataset("training needs at least two samples (one for validation)");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng = make_rng(seed, 0x5b117);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))),
                                               1, n - 1);
    DataSplit s;
    s.val.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_val));
    s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_val), idx.end());
    return s;
}

inline LossBatch make_loss_batch(const ChannelDataset &ds, std::span<const std::size_t> indices,
                                 std::span<const double> nominal_snr_db)
{
    LossBatch lb;
    lb.weights = RateWeights::uniform(ds.spec.n_ue);
    for (std::size_t j = 0; j < indices.size(); ++j)
    {
        const auto &h = ds.samples.at(indices[j]);
        lb.channels.push_back(&h);
        lb.sigma2.push_back(ue_noise_variances(h, nominal_snr_db[j]));
    }
    return lb;
}

// Runs the model on one batch and returns the loss tensor (batch mean of
// -weighted sum-rate). `rates` receives the per-sample sum-rates.
inline ad::Tensor batch_loss(ad::Tape &tape, const ModelConfig &cfg, ModelParams &mp, const LossBatch &lb,
                             ad::Mode mode, std::vector<double> *rates = nullptr)
{
    const ad::Tensor input = make_input(cfg, lb.channels, lb.sigma2);
    const ModelOutput out = forward(tape, cfg, mp, input, mode);
    return neg_sum_rate(tape, out.directions, out.power, lb, rates);
}

namespace detail
{
inline std::vector<double> validation_snrs(const TrainConfig &tc, std::span<const std::size_t> val)
{
    std::vector<double> snr(val.size(), tc.snr_db);
    if (tc.snr_policy == SnrPolicy::Uniform)
        for (std::size_t j = 0; j < val.size(); ++j)
        {
            Rng rng = make_rng(tc.seed ^ 0x7a11da7eULL, val[j]);
            snr[j] = std::uniform_real_distribution<double>(tc.snr_min_db, tc.snr_max_db)(rng);
        }
    return snr;
}

inline double batch_snr(const TrainConfig &tc, std::size_t epoch, std::size_t batch)
{
    if (tc.snr_policy == SnrPolicy::Fixed)
        return tc.snr_db;
    Rng rng = make_rng(tc.seed ^ 0x5a3b1e5ULL, (static_cast<std::uint64_t>(epoch) << 32) | batch);
    return std::uniform_real_distribution<double>(tc.snr_min_db, tc.snr_max_db)(rng);
}

inline std::vector<std::size_t> epoch_order(const TrainConfig &tc, std::vector<std::size_t> order, std::size_t epoch)
{
    Rng rng = make_rng(tc.seed ^ 0xe90c4ULL, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}
} // namespace detail

// Mean eval-mode loss over `indices` at the given per-sample nominal SNRs.
inline double evaluate_loss(const ModelConfig &cfg, ModelParams &mp, const ChannelDataset &ds,
                            std::span<const std::size_t> indices, std::span<const double> nominal_snr_db,
                            std::size_t batch_size = 64)
{
    double total = 0.0;
    for (std::size_t lo = 0; lo < indices.size(); lo += batch_size)
    {
        const std::size_t hi = std::min(indices.size(), lo + batch_size);
        const LossBatch lb = make_loss_batch(ds, indices.subspan(lo, hi - lo), nominal_snr_db.subspan(lo, hi - lo));
        ad::Tape tape;
        total += batch_loss(tape, cfg, mp, lb, ad::Mode::Eval).item() * static_cast<double>(hi - lo);
    }
    return total / static_cast<double>(indices.size());
}

using EpochCallback = std::function<void(std::size_t epoch, double train_loss, double val_loss)>;

// Minimizes the batch-mean negative sum-rate with Adam. Returns the
// parameters of the epoch with the lowest validation loss.
inline TrainResult train(const ModelConfig &cfg, ModelParams params, const ChannelDataset &ds, const TrainConfig &tc,
                         const EpochCallback &on_epoch = {})
{
    tc.validate();
    cfg.validate();
    if (ds.samples.empty())
        throw EmptyDataset("training dataset is empty");
    if (ds.spec.m_tx != cfg.m_tx || ds.spec.n_ue != cfg.n_ue || ds.spec.k_sc() != cfg.k_sc)
        throw DimensionMismatch("train: dataset shape (" + std::to_string(ds.spec.m_tx) + ", " +
                                std::to_string(ds.spec.n_ue) + ", " + std::to_string(ds.spec.k_sc()) +
                                ") does not match the model");
    const auto t0 = std::chrono::steady_clock::now();
    const DataSplit split = split_indices(ds.size(), tc.val_fraction, tc.seed);
    const std::vector<double> val_snr = detail::validation_snrs(tc, split.val);

    TrainResult res;
    ad::Adam adam({tc.lr, 0.9, 0.999, 1e-8});
    std::vector<ad::Tensor> trainable = params.trainable();

    auto run_epoch = [&](std::size_t epoch, ModelParams &mp, bool update)
    {
        const auto order = detail::epoch_order(tc, split.train, epoch);
        double total = 0.0;
        ad::Tape tape;
        std::vector<double> rates;
        for (std::size_t lo = 0, batch = 0; lo < order.size(); lo += tc.batch_size, ++batch)
        {
            const std::size_t hi = std::min(order.size(), lo + tc.batch_size);
            const std::span<const std::size_t> idx(order.data() + lo, hi - lo);
            const std::vector<double> snr(idx.size(), detail::batch_snr(tc, epoch, batch));
            const LossBatch lb = make_loss_batch(ds, idx, snr);
            tape.reset();
            ad::Tensor loss = batch_loss(tape, cfg, mp, lb, ad::Mode::Train, &rates);
            if (!std::isfinite(loss.item()))
            {
                std::size_t bad = idx[0];
                for (std::size_t j = 0; j < rates.size(); ++j)
                    if (!std::isfinite(rates[j]))
                    {
                        bad = idx[j];
                        break;
                    }
                throw NanLoss(epoch, batch, bad, "non-finite training loss");
            }
            total += loss.item() * static_cast<double>(idx.size());
            if (update)
            {
                tape.backward(loss);
                adam.step(trainable);
                mp.zero_grad();
            }
        }
        return total / static_cast<double>(order.size());
    };

    {
        ModelParams probe = params.clone();
        res.report.initial_train_loss = run_epoch(0, probe, false);
    }

    ModelParams best = params.clone();
    for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch)
    {
        adam.set_lr(tc.lr * std::pow(tc.lr_decay, static_cast<double>(epoch)));
        const double train_loss = run_epoch(epoch, params, true);
        const double val_loss = evaluate_loss(cfg, params, ds, split.val, val_snr);
        if (!std::isfinite(val_loss))
            throw NanLoss(epoch, 0, split.val.front(), "non-finite validation loss");
        res.report.train_loss.push_back(train_loss);
        res.report.val_loss.push_back(val_loss);
        if (on_epoch)
            on_epoch(epoch, train_loss, val_loss);
        if (val_loss < res.report.best_val_loss)
        {
            res.report.best_val_loss = val_loss;
            res.report.best_epoch = epoch;
            best = params.clone();
        }
        else if (epoch - res.report.best_epoch >= tc.early_stop_patience)
        {
            break;
        }
    }
    res.best = std::move(best);
    res.report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace beamopt
