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

#include "baselines.hpp"
#include "dataset.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "trainer.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace beamopt
{

// One line of the results table.
struct ResultRow
{
    std::string experiment;
    std::string method;
    double snr_db = 0.0;
    double se_mean = 0.0;
    double se_std = 0.0;
    std::size_t n = 0;

    friend bool operator==(const ResultRow &, const ResultRow &) = default;
};

struct EvalModel
{
    ModelConfig cfg;
    ModelParams params;
};

namespace detail
{
inline ResultRow summarize(const std::string &experiment, const std::string &method, double snr_db,
                           const std::vector<std::optional<double>> &rates)
{
    ResultRow row{experiment, method, snr_db, 0.0, 0.0, 0};
    double s = 0.0;
    for (const auto &r : rates)
        if (r)
        {
            s += *r;
            ++row.n;
        }
    if (row.n == 0)
        return row;
    row.se_mean = s / static_cast<double>(row.n);
    if (row.n > 1)
    {
        double ss = 0.0;
        for (const auto &r : rates)
            if (r)
                ss += (*r - row.se_mean) * (*r - row.se_mean);
        row.se_std = std::sqrt(ss / static_cast<double>(row.n - 1));
    }
    return row;
}
} // namespace detail

// Per-sample weighted sum-rate of a classical method ("ZF" or "MMSE") at a
// nominal SNR. ZF returns nothing when the channel Gram matrix is singular.
inline std::optional<double> baseline_rate(const std::string &method, const ChannelMatrix &h, double nominal_snr_db,
                                           double p_max)
{
    const auto sigma2 = ue_noise_variances(h, nominal_snr_db);
    BeamformerSet bf;
    if (method == "ZF")
    {
        try
        {
            bf = zf_beamformer(h, p_max);
        }
        catch (const SingularChannel &)
        {
            return std::nullopt;
        }
    }
    else if (method == "MMSE")
        bf = mmse_beamformer(h, sigma2, p_max);
    else
        throw ConfigError("methods", "unknown baseline '" + method + "'");
    return weighted_sum_rate(sinr_per_ue(h, bf, sigma2), RateWeights::uniform(h.n_ue));
}

// Per-sample sum-rates of a trained model, in sample order. Eval-mode
// inference treats samples independently, so chunking across threads does
// not change any value.
inline std::vector<double> model_rates(const EvalModel &model, const ChannelDataset &ds, double nominal_snr_db,
                                       std::size_t threads = 1, std::size_t chunk = 32)
{
    const std::size_t n = ds.size();
    std::vector<double> rates(n);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    const ModelParams frozen = model.params.frozen();
    parallel_for(chunks, threads, [&](std::size_t c)
                 {
        ModelParams mp = frozen;
        const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        std::vector<std::size_t> idx(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        const std::vector<double> snr(idx.size(), nominal_snr_db);
        const LossBatch lb = make_loss_batch(ds, idx, snr);
        ad::Tape tape;
        std::vector<double> r;
        batch_loss(tape, model.cfg, mp, lb, ad::Mode::Eval, &r);
        std::copy(r.begin(), r.end(), rates.begin() + static_cast<std::ptrdiff_t>(lo)); });
    return rates;
}

// Paired evaluation: every method sees the same channels and the same per-UE
// noise variances at each nominal SNR.
inline std::vector<ResultRow> evaluate(const std::string &experiment, const ChannelDataset &ds,
                                       std::span<const double> snr_grid_db, const std::vector<std::string> &baselines,
                                       const std::vector<EvalModel> &models, double p_max, std::size_t threads = 1)
{
    if (ds.samples.empty())
        throw EmptyDataset("evaluation dataset is empty");
    for (const auto &m : models)
        if (m.cfg.m_tx != ds.spec.m_tx || m.cfg.n_ue != ds.spec.n_ue || m.cfg.k_sc != ds.spec.k_sc())
            throw CheckpointError("model " + m.cfg.method_name() + " expects a different channel shape than the dataset");
    std::vector<ResultRow> rows;
    for (double snr : snr_grid_db)
    {
        for (const auto &method : baselines)
        {
            std::vector<std::optional<double>> rates(ds.size());
            parallel_for(ds.size(), threads, [&](std::size_t i)
                         { rates[i] = baseline_rate(method, ds.samples[i], snr, p_max); });
            rows.push_back(detail::summarize(experiment, method, snr, rates));
        }
        for (const auto &m : models)
        {
            const auto r = model_rates(m, ds, snr, threads);
            rows.push_back(detail::summarize(experiment, m.cfg.method_name(), snr,
                                             std::vector<std::optional<double>>(r.begin(), r.end())));
        }
    }
    return rows;
}

} // namespace beamopt
