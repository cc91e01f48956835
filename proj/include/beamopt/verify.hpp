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
#include "baselines.hpp"
#include "channel.hpp"
#include "gradcheck.hpp"
#include "metrics.hpp"
#include "models.hpp"
#include "rng.hpp"
#include "sum_rate_loss.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

// Fast self-test of the numerical core, run by `beamopt verify`.
namespace beamopt
{

struct VerifyOptions
{
    ad::GeluCoefficients gelu; // overridable to prove a broken layer is caught
    std::uint64_t seed = 20240917;
};

struct CheckResult
{
    std::string name;
    bool passed = false;
    double value = 0.0;     // measured error
    double threshold = 0.0; // pass iff value <= threshold
    double seconds = 0.0;
};

namespace detail
{

inline CMatrix random_cmatrix(std::size_t rows, std::size_t cols, Rng &rng)
{
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CMatrix a(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            a(r, c) = cdouble(g(rng), g(rng));
    return a;
}

inline ad::Tensor random_tensor(ad::Shape shape, Rng &rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(ad::numel(shape));
    for (auto &x : v)
        x = g(rng);
    return ad::Tensor(std::move(shape), std::move(v), true);
}

inline std::vector<double> random_weights(std::size_t n, Rng &rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(n);
    for (auto &x : w)
        x = u(rng);
    return w;
}

// Sum-rate written directly from the SINR definition, one scalar at a time.
inline double scalar_sum_rate(const ChannelMatrix &h, const BeamformerSet &bf, const std::vector<double> &sigma2)
{
    double total = 0.0;
    for (std::size_t k = 0; k < h.k_sc; ++k)
        for (std::size_t n = 0; n < h.n_ue; ++n)
        {
            double signal = 0.0, interference = 0.0;
            for (std::size_t i = 0; i < h.n_ue; ++i)
            {
                double re = 0.0, im = 0.0;
                for (std::size_t m = 0; m < h.m_tx; ++m)
                {
                    const cdouble a = h(k, m, n), b = bf(k, m, i);
                    re += a.real() * b.real() - a.imag() * b.imag();
                    im += a.real() * b.imag() + a.imag() * b.real();
                }
                const double s = bf.p[i] * (re * re + im * im);
                (i == n ? signal : interference) += s;
            }
            total += std::log2(1.0 + signal / (interference + sigma2[n]));
        }
    return total / static_cast<double>(h.k_sc);
}

inline ChannelMatrix random_channel(std::size_t m, std::size_t n, std::size_t k, Rng &rng)
{
    ChannelSpec spec;
    spec.m_tx = m;
    spec.n_ue = n;
    spec.subcarriers = k;
    return gen_channel(spec, rng);
}

inline BeamformerSet random_beamformers(std::size_t m, std::size_t n, std::size_t k, double p_max, Rng &rng)
{
    BeamformerSet bf(m, n, k);
    for (std::size_t kk = 0; kk < k; ++kk)
        bf.set_slice(kk, normalize_columns(random_cmatrix(m, n, rng)));
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double total = 0.0;
    for (auto &p : bf.p)
        total += (p = u(rng));
    for (auto &p : bf.p)
        p *= p_max / total;
    return bf;
}

// Largest distance between columns of a and b after removing each column's common phase.
inline double aligned_column_distance(const CMatrix &a, const CMatrix &b)
{
    double worst = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c)
    {
        cdouble ip = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r)
            ip += std::conj(a(r, c)) * b(r, c);
        const cdouble phase = std::abs(ip) > 0.0 ? ip / std::abs(ip) : cdouble(1.0);
        double d = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r)
            d += std::norm(a(r, c) * phase - b(r, c));
        worst = std::max(worst, std::sqrt(d));
    }
    return worst;
}

} // namespace detail

inline std::vector<CheckResult> run_verify(const VerifyOptions &opt = {})
{
    using namespace detail;
    std::vector<CheckResult> out;
    Rng rng(opt.seed);

    auto timed = [&](std::string name, double threshold, const std::function<double()> &fn)
    {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r{std::move(name), false, 0.0, threshold, 0.0};
        try
        {
            r.value = fn();
            r.passed = r.value <= threshold;
        }
        catch (const std::exception &)
        {
            r.value = std::numeric_limits<double>::infinity();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    };

    timed("sum-rate matches scalar oracle", 1e-12,
          [&]
          {
              double worst = 0.0;
              std::uniform_int_distribution<std::size_t> dim(1, 8), ksc(1, 16);
              std::uniform_real_distribution<double> snr(-15.0, 50.0);
              for (int t = 0; t < 100; ++t)
              {
                  const std::size_t m = dim(rng), n = dim(rng), k = ksc(rng);
                  const ChannelMatrix h = random_channel(m, n, k, rng);
                  const BeamformerSet bf = random_beamformers(m, n, k, static_cast<double>(n), rng);
                  const auto s2 = ue_noise_variances(h, snr(rng));
                  const double fast = weighted_sum_rate(sinr_per_ue(h, bf, s2), RateWeights::uniform(n));
                  const double ref = scalar_sum_rate(h, bf, s2);
                  worst = std::max(worst, std::abs(fast - ref) / std::max(1.0, std::abs(ref)));
              }
              return worst;
          });

    timed("ZF nulls inter-user interference", 1e-9,
          [&]
          {
              double worst = 0.0;
              for (int t = 0; t < 20; ++t)
              {
                  const ChannelMatrix h = random_channel(4, 4, 12, rng);
                  for (std::size_t k = 0; k < h.k_sc; ++k)
                  {
                      const CMatrix hk = h.slice(k);
                      const CMatrix g = matmul(transpose(hk), zf_beamformer(hk, 4.0).directions);
                      for (std::size_t j = 0; j < 4; ++j)
                          for (std::size_t i = 0; i < 4; ++i)
                              if (i != j)
                                  worst = std::max(worst, std::abs(g(j, i)));
                  }
              }
              return worst;
          });

    timed("MMSE approaches ZF as noise vanishes", 1e-5,
          [&]
          {
              double worst = 0.0;
              for (int t = 0; t < 20; ++t)
              {
                  const CMatrix hk = random_cmatrix(4, 4, rng);
                  worst = std::max(worst, aligned_column_distance(mmse_beamformer(hk, 1e-12, 4.0).directions,
                                                                  zf_beamformer(hk, 4.0).directions));
              }
              return worst;
          });

    timed("single-user optimal structure is the matched filter", 1e-12,
          [&]
          {
              double worst = 0.0;
              for (double lambda : {0.0, 1.0, 10.0, 100.0})
              {
                  const CMatrix hk = random_cmatrix(4, 1, rng);
                  const CMatrix w = optimal_structure_bf(hk, {{lambda}}, std::vector<double>{1.0}, 0.5).directions;
                  const CMatrix mf = matched_filter(hk, 1.0).directions;
                  cdouble ip = 0.0;
                  for (std::size_t r = 0; r < 4; ++r)
                      ip += std::conj(mf(r, 0)) * w(r, 0);
                  worst = std::max(worst, std::abs(std::abs(ip) - 1.0));
              }
              return worst;
          });

    timed("virtual uplink powers meet their targets", 1e-8,
          [&]
          {
              double worst = 0.0;
              const std::vector<double> targets = {1.0, 1.0};
              for (int t = 0; t < 20; ++t)
              {
                  const CMatrix hk = random_cmatrix(2, 2, rng);
                  const auto lambda = solve_virtual_uplink_powers(hk, targets, 1.0).lambda;
                  for (double s : virtual_uplink_sinrs(hk, lambda, 1.0))
                      worst = std::max(worst, std::abs(s - 1.0));
              }
              return worst;
          });

    auto layer_check = [&](std::string name, std::vector<ad::Tensor> inputs,
                           std::function<ad::Tensor(ad::Tape &)> body, std::size_t out_size)
    {
        const auto w = random_weights(out_size, rng);
        timed("gradient: " + std::move(name), 1e-5,
              [&]
              {
                  return ad::check_gradients([&](ad::Tape &tape) { return ad::weighted_sum(tape, body(tape), w); },
                                             inputs)
                      .max_rel_error;
              });
    };

    {
        auto x = random_tensor({3, 5}, rng);
        layer_check("gelu", {x}, [&](ad::Tape &t) { return ad::gelu(t, x, opt.gelu); }, 15);
    }
    {
        auto x = random_tensor({2, 3, 8}, rng), w = random_tensor({4, 3, 3}, rng), b = random_tensor({4}, rng);
        layer_check("conv1d stride 2", {x, w, b}, [&](ad::Tape &t) { return ad::conv1d(t, x, w, b, 2, 1); }, 2 * 4 * 4);
    }
    {
        auto x = random_tensor({3, 2, 4}, rng), g = random_tensor({2}, rng), b = random_tensor({2}, rng);
        auto rm = ad::Tensor::zeros({2}), rv = ad::Tensor::full({2}, 1.0);
        layer_check("batchnorm", {x, g, b},
                    [&](ad::Tape &t) { return ad::batchnorm1d(t, x, g, b, rm, rv, ad::Mode::Train); }, 24);
    }
    {
        auto x = random_tensor({3, 6}, rng), w = random_tensor({4, 6}, rng), b = random_tensor({4}, rng);
        layer_check("linear", {x, w, b}, [&](ad::Tape &t) { return ad::linear(t, x, w, b); }, 12);
    }
    {
        auto x = random_tensor({3, 4}, rng);
        layer_check("softmax", {x}, [&](ad::Tape &t) { return ad::softmax(t, x); }, 12);
    }
    {
        auto x = random_tensor({2, 2 * 2 * 3 * 2}, rng);
        layer_check("direction normalization", {x},
                    [&](ad::Tape &t) { return ad::normalize_directions(t, x, 2, 3, 2); }, 48);
    }

    ModelConfig small;
    small.m_tx = 2;
    small.n_ue = 2;
    small.k_sc = 4;
    small.fc_hidden_bf = {16};
    small.fc_hidden_pw = {16};
    small.p_max = 2.0;

    timed("gradient: full NNBF-P loss graph", 1e-4,
          [&]
          {
              ModelParams mp = init_params(small, opt.seed);
              std::vector<ChannelMatrix> hs;
              for (int b = 0; b < 3; ++b)
                  hs.push_back(random_channel(2, 2, 4, rng));
              LossBatch batch;
              for (const auto &h : hs)
              {
                  batch.channels.push_back(&h);
                  batch.sigma2.push_back(ue_noise_variances(h, 5.0));
              }
              batch.weights = RateWeights::uniform(2);
              const ad::Tensor input = make_input(small, batch.channels, batch.sigma2);
              ad::GradCheckOptions gopt;
              gopt.max_entries = 6;
              gopt.seed = opt.seed;
              return ad::check_gradients(
                         [&](ad::Tape &tape)
                         {
                             const ModelOutput y = forward(tape, small, mp, input, ad::Mode::Train);
                             return neg_sum_rate(tape, y.directions, y.power, batch);
                         },
                         mp.trainable(), gopt)
                  .max_rel_error;
          });

    timed("unit-norm directions and full power budget", 1e-9,
          [&]
          {
              double worst = 0.0;
              for (int t = 0; t < 50; ++t)
              {
                  ModelParams mp = init_params(small, opt.seed + static_cast<std::uint64_t>(t) + 1);
                  std::vector<ChannelMatrix> hs;
                  std::vector<const ChannelMatrix *> ptrs;
                  std::vector<std::vector<double>> s2;
                  for (int b = 0; b < 2; ++b)
                      hs.push_back(random_channel(2, 2, 4, rng));
                  for (const auto &h : hs)
                  {
                      ptrs.push_back(&h);
                      s2.push_back(ue_noise_variances(h, 5.0));
                  }
                  ad::Tape tape;
                  const ModelOutput y = forward(tape, small, mp, make_input(small, ptrs, s2), ad::Mode::Train);
                  for (std::size_t b = 0; b < hs.size(); ++b)
                  {
                      const BeamformerSet bf = to_beamformer_set(y.directions, y.power, b, 2, 2, 4);
                      double total = 0.0;
                      for (double p : bf.p)
                          total += p;
                      worst = std::max(worst, std::abs(total - small.p_max));
                      for (std::size_t k = 0; k < 4; ++k)
                          for (std::size_t n = 0; n < 2; ++n)
                          {
                              double s = 0.0;
                              for (std::size_t m = 0; m < 2; ++m)
                                  s += std::norm(bf(k, m, n));
                              worst = std::max(worst, std::abs(std::sqrt(s) - 1.0));
                          }
                  }
              }
              return worst;
          });

    return out;
}

} // namespace beamopt
