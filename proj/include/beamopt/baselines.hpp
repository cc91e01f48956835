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
#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

// Classical precoders. Signals follow y_n = h_n^T x, so the effective
// channel is G = H^T (N x M) and every pseudo-inverse is taken of G. With
// that convention the zero-forcing directions satisfy h_j^T w_i = 0, i != j.
namespace beamopt
{

// Directions (M x N, unit-norm columns) and powers for one subcarrier.
struct BeamformerSlice
{
    CMatrix directions;
    std::vector<double> p;
};

inline std::vector<double> equal_power(std::size_t n_ue, double p_max)
{
    if (n_ue == 0)
        throw ConfigError("n_ue", "must be at least 1");
    return std::vector<double>(n_ue, p_max / static_cast<double>(n_ue));
}

// Scales every column to unit norm. Zero columns are left untouched.
inline CMatrix normalize_columns(CMatrix w)
{
    for (std::size_t c = 0; c < w.cols(); ++c)
    {
        double s = 0.0;
        for (std::size_t r = 0; r < w.rows(); ++r)
            s += std::norm(w(r, c));
        const double nrm = std::sqrt(s);
        if (nrm > 0.0)
            for (std::size_t r = 0; r < w.rows(); ++r)
                w(r, c) /= nrm;
    }
    return w;
}

// H^T H* = G G^H, the N x N Gram matrix of the effective channel.
inline CMatrix effective_gram(const CMatrix &h)
{
    return matmul(transpose(h), conj(h));
}

inline BeamformerSlice zf_beamformer(const CMatrix &h, double p_max)
{
    if (h.cols() > h.rows())
        throw DimensionMismatch("zf_beamformer: more UEs than transmit antennas");
    CMatrix x;
    try
    {
        x = inverse(effective_gram(h));
    }
    catch (const SingularMatrix &e)
    {
        throw SingularChannel(std::string("zf_beamformer: singular channel Gram matrix: ") + e.what());
    }
    return {normalize_columns(matmul(conj(h), x)), equal_power(h.cols(), p_max)};
}

// Regularized inverse G^H (G G^H + (N sigma2 / P_max) I)^-1 with equal powers.
inline BeamformerSlice mmse_beamformer(const CMatrix &h, double sigma2, double p_max)
{
    if (!(sigma2 > 0.0))
        throw Error("mmse_beamformer: sigma2 must be positive");
    const std::size_t n = h.cols();
    const double reg = sigma2 * static_cast<double>(n) / p_max;
    CMatrix gram = effective_gram(h);
    for (std::size_t i = 0; i < n; ++i)
        gram(i, i) += reg;
    return {normalize_columns(matmul(conj(h), inverse(gram))), equal_power(n, p_max)};
}

// Per-UE noise: G^H (G G^H + (N / P_max) diag(sigma2))^-1, the regularized
// inverse of the noise-whitened channel with the whitening folded back out.
inline BeamformerSlice mmse_beamformer(const CMatrix &h, std::span<const double> sigma2, double p_max)
{
    const std::size_t n = h.cols();
    if (sigma2.size() != n)
        throw DimensionMismatch("mmse_beamformer: one noise variance per UE required");
    CMatrix gram = effective_gram(h);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!(sigma2[i] > 0.0))
            throw Error("mmse_beamformer: sigma2 must be positive");
        gram(i, i) += sigma2[i] * static_cast<double>(n) / p_max;
    }
    return {normalize_columns(matmul(conj(h), inverse(gram))), equal_power(n, p_max)};
}

inline BeamformerSlice matched_filter(const CMatrix &h, double p_max)
{
    return {normalize_columns(conj(h)), equal_power(h.cols(), p_max)};
}

struct VirtualUplinkPowers
{
    std::vector<double> lambda;
};

// Directions of (I_M + (1/sigma2) H* diag(lambda) H^T)^-1 H*, normalized; powers passed through.
inline BeamformerSlice optimal_structure_bf(const CMatrix &h, const VirtualUplinkPowers &lambda,
                                            std::span<const double> p, double sigma2)
{
    const std::size_t M = h.rows(), N = h.cols();
    if (lambda.lambda.size() != N || p.size() != N)
        throw DimensionMismatch("optimal_structure_bf: lambda/p length differs from UE count");
    if (!(sigma2 > 0.0))
        throw Error("optimal_structure_bf: sigma2 must be positive");
    for (std::size_t i = 0; i < N; ++i)
        if (!(lambda.lambda[i] >= 0.0) || !(p[i] >= 0.0))
            throw Error("optimal_structure_bf: lambda and p must be non-negative");
    CMatrix a = CMatrix::identity(M);
    for (std::size_t i = 0; i < N; ++i)
    {
        const double s = lambda.lambda[i] / sigma2;
        for (std::size_t r = 0; r < M; ++r)
            for (std::size_t c = 0; c < M; ++c)
                a(r, c) += s * std::conj(h(r, i)) * h(c, i);
    }
    return {normalize_columns(solve(a, conj(h))), std::vector<double>(p.begin(), p.end())};
}

namespace detail
{
// g_k^H (sigma2 I + sum_{i != k} lambda_i g_i g_i^H)^-1 g_k with g = h*.
inline double uplink_quadratic_form(const CMatrix &h, std::span<const double> lambda, double sigma2, std::size_t k)
{
    const std::size_t M = h.rows(), N = h.cols();
    CMatrix cov = scale(CMatrix::identity(M), sigma2);
    for (std::size_t i = 0; i < N; ++i)
    {
        if (i == k)
            continue;
        for (std::size_t r = 0; r < M; ++r)
            for (std::size_t c = 0; c < M; ++c)
                cov(r, c) += lambda[i] * std::conj(h(r, i)) * h(c, i);
    }
    const CVector g = conj(h).col(k);
    return inner(g, LuDecomposition(cov).solve(g)).real();
}
} // namespace detail

// Virtual uplink SINR of each UE under MMSE receive filters.
inline std::vector<double> virtual_uplink_sinrs(const CMatrix &h, std::span<const double> lambda, double sigma2)
{
    if (lambda.size() != h.cols())
        throw DimensionMismatch("virtual_uplink_sinrs: one lambda per UE required");
    std::vector<double> out(h.cols());
    for (std::size_t k = 0; k < h.cols(); ++k)
        out[k] = lambda[k] * detail::uplink_quadratic_form(h, lambda, sigma2, k);
    return out;
}

struct FixedPointOptions
{
    std::size_t max_iter = 20000;
    double tol = 1e-11;
    double damping = 0.5;
    double p_max = std::numeric_limits<double>::infinity();
};

// Damped iteration lambda_k <- rho_k / (g_k^H (sigma2 I + sum_{i != k} lambda_i g_i g_i^H)^-1 g_k),
// stopping once every UE's virtual uplink SINR is within a relative `tol` of its target.
inline VirtualUplinkPowers solve_virtual_uplink_powers(const CMatrix &h, std::span<const double> target_sinrs,
                                                       double sigma2, const FixedPointOptions &opt = {})
{
    const std::size_t N = h.cols();
    if (target_sinrs.size() != N)
        throw DimensionMismatch("solve_virtual_uplink_powers: one target per UE required");
    if (!(sigma2 > 0.0))
        throw Error("solve_virtual_uplink_powers: sigma2 must be positive");
    for (double r : target_sinrs)
        if (!(r > 0.0))
            throw Error("solve_virtual_uplink_powers: targets must be positive");

    std::vector<double> lambda(N, 0.0), next(N);
    for (std::size_t it = 0; it < opt.max_iter; ++it)
    {
        double worst = 0.0;
        for (std::size_t k = 0; k < N; ++k)
        {
            next[k] = target_sinrs[k] / detail::uplink_quadratic_form(h, lambda, sigma2, k);
            worst = std::max(worst, std::abs(next[k] - lambda[k]) / next[k]);
        }
        if (!std::all_of(next.begin(), next.end(), [](double v)
                         { return std::isfinite(v); }))
            break;
        if (worst <= opt.tol)
        {
            if (std::accumulate(lambda.begin(), lambda.end(), 0.0) > opt.p_max + 1e-9)
                throw InfeasibleTargets(lambda, "solve_virtual_uplink_powers: targets need more than the power budget");
            return {lambda};
        }
        for (std::size_t k = 0; k < N; ++k)
            lambda[k] = (1.0 - opt.damping) * lambda[k] + opt.damping * next[k];
    }
    throw InfeasibleTargets(lambda, "solve_virtual_uplink_powers: no convergence after " +
                                        std::to_string(opt.max_iter) + " iterations");
}

// Whole-channel helpers: one slice per subcarrier. ZF/MMSE use equal powers.
inline BeamformerSet zf_beamformer(const ChannelMatrix &h, double p_max)
{
    BeamformerSet bf(h.m_tx, h.n_ue, h.k_sc);
    for (std::size_t k = 0; k < h.k_sc; ++k)
        bf.set_slice(k, zf_beamformer(h.slice(k), p_max).directions);
    bf.p = equal_power(h.n_ue, p_max);
    return bf;
}

inline BeamformerSet mmse_beamformer(const ChannelMatrix &h, std::span<const double> sigma2, double p_max)
{
    if (sigma2.size() != h.n_ue)
        throw DimensionMismatch("mmse_beamformer: one noise variance per UE required");
    BeamformerSet bf(h.m_tx, h.n_ue, h.k_sc);
    for (std::size_t k = 0; k < h.k_sc; ++k)
        bf.set_slice(k, mmse_beamformer(h.slice(k), sigma2, p_max).directions);
    bf.p = equal_power(h.n_ue, p_max);
    return bf;
}

} // namespace beamopt
