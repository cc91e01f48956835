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
#include "linalg.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace beamopt
{

// W = sqrt(p) (.) W~ per subcarrier: unit-norm directions w_tilde(k, :, n)
// stored (K, M, N) row-major, plus one power per UE shared across subcarriers.
struct BeamformerSet
{
    std::size_t m_tx = 0, n_ue = 0, k_sc = 0;
    std::vector<cdouble> w_tilde;
    std::vector<double> p;

    BeamformerSet() = default;
    BeamformerSet(std::size_t m, std::size_t n, std::size_t k) : m_tx(m), n_ue(n), k_sc(k), w_tilde(m * n * k), p(n, 0.0) {}

    cdouble &operator()(std::size_t k, std::size_t m, std::size_t n) { return w_tilde[(k * m_tx + m) * n_ue + n]; }
    const cdouble &operator()(std::size_t k, std::size_t m, std::size_t n) const
    {
        return w_tilde[(k * m_tx + m) * n_ue + n];
    }

    void set_slice(std::size_t k, const CMatrix &directions)
    {
        if (directions.rows() != m_tx || directions.cols() != n_ue)
            throw DimensionMismatch("BeamformerSet::set_slice: expected M x N directions");
        for (std::size_t m = 0; m < m_tx; ++m)
            for (std::size_t n = 0; n < n_ue; ++n)
                (*this)(k, m, n) = directions(m, n);
    }

    CMatrix slice(std::size_t k) const
    {
        CMatrix out(m_tx, n_ue);
        for (std::size_t m = 0; m < m_tx; ++m)
            for (std::size_t n = 0; n < n_ue; ++n)
                out(m, n) = (*this)(k, m, n);
        return out;
    }

    // Unit-norm columns and the total power budget, both to within tol.
    void validate(double p_max, double tol = 1e-9) const
    {
        if (w_tilde.size() != m_tx * n_ue * k_sc || p.size() != n_ue)
            throw DimensionMismatch("BeamformerSet: storage does not match (K, M, N)");
        double total = 0.0;
        for (double v : p)
        {
            if (!(v >= 0.0))
                throw Error("BeamformerSet: negative or non-finite power");
            total += v;
        }
        if (total > p_max + tol)
            throw Error("BeamformerSet: total power " + std::to_string(total) + " exceeds budget");
        for (std::size_t k = 0; k < k_sc; ++k)
            for (std::size_t n = 0; n < n_ue; ++n)
            {
                double s = 0.0;
                for (std::size_t m = 0; m < m_tx; ++m)
                    s += std::norm((*this)(k, m, n));
                if (std::abs(std::sqrt(s) - 1.0) > tol)
                    throw Error("BeamformerSet: direction is not unit norm");
            }
    }
};

struct RateWeights
{
    std::vector<double> alpha;

    static RateWeights uniform(std::size_t n_ue) { return {std::vector<double>(n_ue, 1.0)}; }
};

// gamma(k, n), (K, N) row-major.
struct SinrGrid
{
    std::size_t k_sc = 0, n_ue = 0;
    std::vector<double> values;

    double operator()(std::size_t k, std::size_t n) const { return values[k * n_ue + n]; }
    double &operator()(std::size_t k, std::size_t n) { return values[k * n_ue + n]; }
};

// Per-UE noise variances at a nominal SNR, including each UE's SNR offset.
inline std::vector<double> ue_noise_variances(const ChannelMatrix &h, double nominal_snr_db)
{
    std::vector<double> s(h.n_ue);
    for (std::size_t n = 0; n < h.n_ue; ++n)
        s[n] = noise_variance(nominal_snr_db + h.per_ue_snr_db[n]);
    return s;
}

// gamma[k,n] = p_n |h_n^T w~_n|^2 / (sum_{i != n} p_i |h_n^T w~_i|^2 + sigma_n^2)
inline SinrGrid sinr_per_ue(const ChannelMatrix &h, const BeamformerSet &bf, std::span<const double> sigma2)
{
    if (h.m_tx != bf.m_tx || h.n_ue != bf.n_ue || h.k_sc != bf.k_sc || bf.p.size() != h.n_ue ||
        sigma2.size() != h.n_ue)
        throw DimensionMismatch("sinr_per_ue: channel, beamformer and noise shapes disagree");
    for (double s : sigma2)
        if (!(s > 0.0))
            throw Error("sinr_per_ue: noise variance must be positive");

    const std::size_t M = h.m_tx, N = h.n_ue, K = h.k_sc;
    SinrGrid g{K, N, std::vector<double>(K * N)};
    std::vector<double> gain(N * N); // gain[n * N + i] = |h_n^T w~_i|^2
    for (std::size_t k = 0; k < K; ++k)
    {
        const cdouble *hk = &h.h[k * M * N];
        const cdouble *wk = &bf.w_tilde[k * M * N];
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t i = 0; i < N; ++i)
            {
                cdouble a = 0.0;
                for (std::size_t m = 0; m < M; ++m)
                    a += hk[m * N + n] * wk[m * N + i];
                gain[n * N + i] = std::norm(a);
            }
        for (std::size_t n = 0; n < N; ++n)
        {
            double interference = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                if (i != n)
                    interference += bf.p[i] * gain[n * N + i];
            g(k, n) = bf.p[n] * gain[n * N + n] / (interference + sigma2[n]);
        }
    }
    return g;
}

// (1/K) sum_k sum_n alpha_n log2(1 + gamma[k, n]), in bps/Hz.
inline double weighted_sum_rate(const SinrGrid &gamma, const RateWeights &w)
{
    if (w.alpha.size() != gamma.n_ue || gamma.values.size() != gamma.k_sc * gamma.n_ue)
        throw DimensionMismatch("weighted_sum_rate: weight count differs from UE count");
    if (gamma.k_sc == 0)
        return 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < gamma.k_sc; ++k)
        for (std::size_t n = 0; n < gamma.n_ue; ++n)
            total += w.alpha[n] * std::log2(1.0 + gamma(k, n));
    return total / static_cast<double>(gamma.k_sc);
}

inline double neg_sum_rate_loss(const ChannelMatrix &h, const BeamformerSet &bf, std::span<const double> sigma2,
                                const RateWeights &w)
{
    return -weighted_sum_rate(sinr_per_ue(h, bf, sigma2), w);
}

} // namespace beamopt
