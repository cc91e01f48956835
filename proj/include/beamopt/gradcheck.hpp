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
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace beamopt::ad
{

struct GradCheckOptions
{
    double step = 1e-6;                 // relative to max(1, |x_i|)
    std::size_t max_entries = 0;        // per tensor; 0 checks every entry
    std::uint64_t seed = 0;             // entry subsampling
    // Optionally scale each tensor's error by at least this fraction of the
    // largest gradient in the graph; 0 judges every tensor on its own scale.
    double relative_floor = 0.0;
};

struct GradCheckResult
{
    double max_rel_error = 0.0;
    std::size_t worst_tensor = 0;
    std::size_t entries_checked = 0;
};

// Compares reverse-mode gradients of the scalar built by `build` against
// central differences. Per tensor the error is
//   max_i |analytic_i - numeric_i| / max(max_i |numeric_i|, floor * global, 1e-10)
// over the checked entries; the result reports the worst tensor.
inline GradCheckResult check_gradients(const std::function<Tensor(Tape &)> &build, std::vector<Tensor> inputs,
                                       const GradCheckOptions &opt = {})
{
    for (auto &t : inputs)
        t.zero_grad();
    {
        Tape tape;
        Tensor out = build(tape);
        tape.backward(out);
    }
    std::vector<std::vector<double>> analytic;
    for (const auto &t : inputs)
        analytic.emplace_back(t.grad().begin(), t.grad().end());

    auto eval = [&]()
    {
        Tape tape;
        return build(tape).item();
    };

    GradCheckResult res;
    Rng rng(opt.seed);
    std::vector<double> max_diff(inputs.size(), 0.0), max_num(inputs.size(), 0.0);
    for (std::size_t j = 0; j < inputs.size(); ++j)
    {
        auto &t = inputs[j];
        std::vector<std::size_t> idx(t.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (opt.max_entries && idx.size() > opt.max_entries)
        {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(opt.max_entries);
        }
        for (std::size_t i : idx)
        {
            const double x0 = t.data()[i];
            const double h = opt.step * std::max(1.0, std::abs(x0));
            t.data()[i] = x0 + h;
            const double fp = eval();
            t.data()[i] = x0 - h;
            const double fm = eval();
            t.data()[i] = x0;
            const double num = (fp - fm) / (2.0 * h);
            max_diff[j] = std::max(max_diff[j], std::abs(num - analytic[j][i]));
            max_num[j] = std::max(max_num[j], std::abs(num));
        }
        res.entries_checked += idx.size();
    }
    const double global = max_num.empty() ? 0.0 : *std::max_element(max_num.begin(), max_num.end());
    for (std::size_t j = 0; j < inputs.size(); ++j)
    {
        const double denom = std::max({max_num[j], opt.relative_floor * global, 1e-10});
        const double rel = max_diff[j] / denom;
        if (rel >= res.max_rel_error)
        {
            res.max_rel_error = rel;
            res.worst_tensor = j;
        }
    }
    return res;
}

} // namespace beamopt::ad
