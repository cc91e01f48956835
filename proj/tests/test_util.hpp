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

#include <beamopt.hpp>

#include <gtest/gtest.h>

#include <random>

namespace beamopt::testing
{

inline CMatrix random_matrix(std::size_t rows, std::size_t cols, Rng &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix a(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            a(r, c) = cdouble(g(rng), g(rng));
    return a;
}

// Diagonally dominant, hence well conditioned.
inline CMatrix well_conditioned(std::size_t n, Rng &rng)
{
    CMatrix a = random_matrix(n, n, rng);
    for (std::size_t i = 0; i < n; ++i)
        a(i, i) += cdouble(3.0 * static_cast<double>(n), 0.0);
    return a;
}

inline CVector random_vector(std::size_t n, Rng &rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CVector v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = cdouble(g(rng), g(rng));
    return v;
}

inline double max_abs_diff(const CMatrix &a, const CMatrix &b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
    return d;
}

inline ChannelSpec small_spec(std::size_t m, std::size_t n, std::size_t k)
{
    ChannelSpec s;
    s.m_tx = m;
    s.n_ue = n;
    s.subcarriers = k;
    return s;
}

inline ad::Tensor random_tensor(ad::Shape shape, Rng &rng, bool requires_grad = true, double sd = 1.0)
{
    std::normal_distribution<double> g(0.0, sd);
    std::vector<double> v(ad::numel(shape));
    for (auto &x : v)
        x = g(rng);
    return ad::Tensor(std::move(shape), std::move(v), requires_grad);
}

inline ModelConfig tiny_model(std::size_t m, std::size_t n, std::size_t k, bool joint = true)
{
    ModelConfig c;
    c.m_tx = m;
    c.n_ue = n;
    c.k_sc = k;
    c.fc_hidden_bf = {16};
    c.fc_hidden_pw = {16};
    c.joint_power = joint;
    c.p_max = static_cast<double>(n);
    return c;
}

} // namespace beamopt::testing
