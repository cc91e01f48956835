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
#include "channel.hpp"
#include "metrics.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace beamopt
{

// Channels and per-UE noise variances of one batch.
struct LossBatch
{
    std::vector<const ChannelMatrix *> channels;
    std::vector<std::vector<double>> sigma2;
    RateWeights weights;
};

// Unpacks row b of the network outputs into a BeamformerSet.
inline BeamformerSet to_beamformer_set(const ad::Tensor &directions, const ad::Tensor &power, std::size_t b,
                                       std::size_t m_tx, std::size_t n_ue, std::size_t k_sc)
{
    BeamformerSet bf(m_tx, n_ue, k_sc);
    const std::size_t F = k_sc * m_tx * n_ue * 2;
    const double *row = &directions.data()[b * F];
    for (std::size_t i = 0; i < k_sc * m_tx * n_ue; ++i)
        bf.w_tilde[i] = cdouble(row[2 * i], row[2 * i + 1]);
    for (std::size_t n = 0; n < n_ue; ++n)
        bf.p[n] = power.data()[b * n_ue + n];
    return bf;
}

// Batch mean of -weighted_sum_rate as a differentiable op of the packed
// directions (B, K*M*N*2) and powers (B, N). Complex products are expanded
// into real arithmetic; channels and noise are constants (the channel
// matrices must outlive the tape). When `rates` is
// given it receives each sample's weighted sum-rate.
inline ad::Tensor neg_sum_rate(ad::Tape &tape, const ad::Tensor &directions, const ad::Tensor &power,
                               const LossBatch &batch, std::vector<double> *rates = nullptr)
{
    const std::size_t B = batch.channels.size();
    if (B == 0)
        throw DimensionMismatch("neg_sum_rate: empty batch");
    const ChannelMatrix &first = *batch.channels.front();
    const std::size_t M = first.m_tx, N = first.n_ue, K = first.k_sc;
    const std::size_t F = K * M * N * 2;
    if (directions.rank() != 2 || directions.dim(0) != B || directions.dim(1) != F)
        throw DimensionMismatch("neg_sum_rate: directions must be (B, 2*K*M*N) = (" + std::to_string(B) + ", " +
                                std::to_string(F) + "), got " + ad::shape_string(directions.shape()));
    if (power.rank() != 2 || power.dim(0) != B || power.dim(1) != N)
        throw DimensionMismatch("neg_sum_rate: powers must be (B, N)");
    if (batch.sigma2.size() != B || batch.weights.alpha.size() != N)
        throw DimensionMismatch("neg_sum_rate: noise/weight sizes differ from batch shape");
    for (std::size_t b = 0; b < B; ++b)
    {
        const auto &h = *batch.channels[b];
        if (h.m_tx != M || h.n_ue != N || h.k_sc != K || batch.sigma2[b].size() != N)
            throw DimensionMismatch("neg_sum_rate: batch mixes channel shapes");
        for (double s2 : batch.sigma2[b])
            if (!(s2 > 0.0))
                throw Error("neg_sum_rate: noise variance must be positive");
    }

    // a[b][k][n][i] = h_n^T w~_i at subcarrier k, kept for the backward pass.
    std::vector<cdouble> a(B * K * N * N);
    std::vector<double> per_sample(B, 0.0);
    const auto dv = directions.data();
    const auto pv = power.data();
    const double inv_k = 1.0 / static_cast<double>(K);
    for (std::size_t b = 0; b < B; ++b)
    {
        const auto &h = *batch.channels[b];
        const double *row = &dv[b * F];
        const double *p = &pv[b * N];
        for (std::size_t k = 0; k < K; ++k)
        {
            cdouble *ak = &a[((b * K + k) * N) * N];
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t i = 0; i < N; ++i)
                {
                    double re = 0.0, im = 0.0;
                    for (std::size_t m = 0; m < M; ++m)
                    {
                        const cdouble hv = h(k, m, n);
                        const double wr = row[((k * M + m) * N + i) * 2];
                        const double wi = row[((k * M + m) * N + i) * 2 + 1];
                        re += hv.real() * wr - hv.imag() * wi;
                        im += hv.real() * wi + hv.imag() * wr;
                    }
                    ak[n * N + i] = cdouble(re, im);
                }
            for (std::size_t n = 0; n < N; ++n)
            {
                double total = batch.sigma2[b][n];
                for (std::size_t i = 0; i < N; ++i)
                    total += p[i] * std::norm(ak[n * N + i]);
                const double interference = total - p[n] * std::norm(ak[n * N + n]);
                per_sample[b] += batch.weights.alpha[n] * std::log2(total / interference) * inv_k;
            }
        }
    }
    double mean = 0.0;
    for (double r : per_sample)
        mean += r;
    mean /= static_cast<double>(B);
    if (rates)
        *rates = per_sample;

    return tape.record({1}, {-mean}, {directions, power},
                       [directions, power, batch, a = std::move(a), B, M, N, K, F](const ad::detail::Node &out) mutable
                       {
        const bool gd = ad::detail::wants_grad(directions), gp = ad::detail::wants_grad(power);
        // d(-mean R)/dS[n][i] for S = |a|^2, per (b, k).
        const double scale = -out.grad[0] / (static_cast<double>(B) * static_cast<double>(K) * std::numbers::ln2);
        const auto pv = power.data();
        std::vector<double> dS(N * N);
        for (std::size_t b = 0; b < B; ++b)
        {
            const auto &h = *batch.channels[b];
            const double *p = &pv[b * N];
            for (std::size_t k = 0; k < K; ++k)
            {
                const cdouble *ak = &a[((b * K + k) * N) * N];
                for (std::size_t n = 0; n < N; ++n)
                {
                    double total = batch.sigma2[b][n];
                    for (std::size_t i = 0; i < N; ++i)
                        total += p[i] * std::norm(ak[n * N + i]);
                    const double interference = total - p[n] * std::norm(ak[n * N + n]);
                    const double wn = scale * batch.weights.alpha[n];
                    for (std::size_t i = 0; i < N; ++i)
                    {
                        const double s = std::norm(ak[n * N + i]);
                        const double d_total = 1.0 / total;
                        const double d_int = (i == n) ? 0.0 : 1.0 / interference;
                        dS[n * N + i] = wn * p[i] * (d_total - d_int);
                        if (gp)
                            power.grad()[b * N + i] += wn * s * (d_total - d_int);
                    }
                }
                if (!gd)
                    continue;
                double *g = &directions.grad()[b * F];
                for (std::size_t n = 0; n < N; ++n)
                    for (std::size_t i = 0; i < N; ++i)
                    {
                        const double g_re = 2.0 * dS[n * N + i] * ak[n * N + i].real();
                        const double g_im = 2.0 * dS[n * N + i] * ak[n * N + i].imag();
                        for (std::size_t m = 0; m < M; ++m)
                        {
                            const cdouble hv = h(k, m, n);
                            g[((k * M + m) * N + i) * 2] += g_re * hv.real() + g_im * hv.imag();
                            g[((k * M + m) * N + i) * 2 + 1] += -g_re * hv.imag() + g_im * hv.real();
                        }
                    }
            }
        } });
}

} // namespace beamopt
