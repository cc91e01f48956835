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

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

// Reverse-mode automatic differentiation over dense f64 tensors.
//
// Every op takes the Tape it records onto. Leaf tensors (parameters) own
// their gradient buffers, which accumulate across backward passes until
// zero_grad(). A tape supports exactly one backward pass; call reset()
// before recording the next forward pass.
namespace beamopt::ad
{

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape &s)
{
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape &s)
{
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += (i ? ", " : "") + std::to_string(s[i]);
    return out + ")";
}

namespace detail
{
struct Node
{
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;

    void ensure_grad()
    {
        if (grad.size() != value.size())
            grad.assign(value.size(), 0.0);
    }
};
} // namespace detail

class Tensor
{
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false)
        : node_(std::make_shared<detail::Node>())
    {
        if (data.size() != numel(shape))
            throw DimensionMismatch("Tensor: " + std::to_string(data.size()) + " values for shape " +
                                    shape_string(shape));
        node_->shape = std::move(shape);
        node_->value = std::move(data);
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false)
    {
        const std::size_t n = numel(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
    }

    static Tensor full(Shape shape, double v, bool requires_grad = false)
    {
        const std::size_t n = numel(shape);
        return Tensor(std::move(shape), std::vector<double>(n, v), requires_grad);
    }

    bool defined() const noexcept { return static_cast<bool>(node_); }
    const Shape &shape() const { return node_->shape; }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t size() const { return node_->value.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    std::span<const double> data() const { return node_->value; }
    std::span<double> data() { return node_->value; }
    double item() const
    {
        if (size() != 1)
            throw DimensionMismatch("Tensor::item on non-scalar " + shape_string(shape()));
        return node_->value[0];
    }

    bool has_grad() const { return node_->grad.size() == node_->value.size(); }
    // Gradient storage; a Tensor is a shared handle, so this is writable
    // through const copies captured by backward closures.
    std::span<double> grad() const { return node_->grad; }
    void zero_grad()
    {
        if (node_->requires_grad)
            node_->grad.assign(node_->value.size(), 0.0);
    }

    // Deep copy with the same requires_grad flag and no gradient.
    Tensor clone() const { return Tensor(shape(), node_->value, requires_grad()); }
    // Deep copy that takes no part in differentiation.
    Tensor detached() const { return Tensor(shape(), node_->value, false); }

    const std::shared_ptr<detail::Node> &node() const noexcept { return node_; }

private:
    std::shared_ptr<detail::Node> node_;
};

class Tape
{
public:
    // Records an op producing `out` from `inputs`. `backward` reads out's
    // gradient and accumulates into the inputs that require one.
    Tensor record(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
                  std::function<void(const detail::Node &out)> backward)
    {
        if (consumed_)
            throw AutodiffError("Tape: recording after backward; call reset() first");
        bool rg = false;
        for (const auto &t : inputs)
            rg = rg || (t.defined() && t.requires_grad());
        Tensor out(std::move(shape), std::move(value), rg);
        if (rg)
        {
            out.node()->ensure_grad();
            for (const auto &t : inputs)
                if (t.defined() && t.requires_grad())
                    t.node()->ensure_grad();
            records_.push_back({out.node(), std::move(backward)});
        }
        ++ops_;
        return out;
    }

    void backward(const Tensor &output)
    {
        if (ops_ == 0)
            throw AutodiffError("backward called before any forward op was recorded");
        if (consumed_)
            throw AutodiffError("backward already ran on this tape; reset() and record a new forward pass");
        if (!output.defined() || output.size() != 1)
            throw AutodiffError("backward needs a scalar output");
        auto it = std::find_if(records_.rbegin(), records_.rend(), [&](const Record &r)
                               { return r.output.get() == output.node().get(); });
        if (it == records_.rend())
            throw AutodiffError("backward output was not produced on this tape, or does not depend on any "
                                "tensor that requires a gradient");
        consumed_ = true;
        output.node()->grad[0] += 1.0;
        for (; it != records_.rend(); ++it)
            it->backward(*it->output);
    }

    void reset()
    {
        records_.clear();
        ops_ = 0;
        consumed_ = false;
    }

    std::size_t size() const noexcept { return ops_; }
    bool consumed() const noexcept { return consumed_; }

private:
    struct Record
    {
        std::shared_ptr<detail::Node> output;
        std::function<void(const detail::Node &)> backward;
    };
    std::vector<Record> records_;
    std::size_t ops_ = 0;
    bool consumed_ = false;
};

namespace detail
{
inline void require(bool ok, const std::string &what)
{
    if (!ok)
        throw DimensionMismatch(what);
}

// Adds g into t's gradient if t takes part in differentiation.
inline bool wants_grad(const Tensor &t) { return t.defined() && t.requires_grad(); }
} // namespace detail

// ---- elementwise and reductions ---------------------------------------

inline Tensor reshape(Tape &tape, const Tensor &x, Shape shape)
{
    detail::require(numel(shape) == x.size(), "reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
    std::vector<double> v(x.data().begin(), x.data().end());
    return tape.record(std::move(shape), std::move(v), {x}, [x](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        auto g = x.grad();
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += out.grad[i]; });
}

inline Tensor add(Tape &tape, const Tensor &a, const Tensor &b)
{
    detail::require(a.shape() == b.shape(), "add: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = a.data()[i] + b.data()[i];
    return tape.record(a.shape(), std::move(v), {a, b}, [a, b](const detail::Node &out) mutable
                       {
        for (const Tensor *t : {&a, &b})
            if (detail::wants_grad(*t))
            {
                auto g = t->grad();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g[i] += out.grad[i];
            } });
}

inline Tensor mul(Tape &tape, const Tensor &a, const Tensor &b)
{
    detail::require(a.shape() == b.shape(), "mul: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = a.data()[i] * b.data()[i];
    return tape.record(a.shape(), std::move(v), {a, b}, [a, b](const detail::Node &out) mutable
                       {
        if (detail::wants_grad(a))
            for (std::size_t i = 0; i < out.grad.size(); ++i)
                a.grad()[i] += out.grad[i] * b.data()[i];
        if (detail::wants_grad(b))
            for (std::size_t i = 0; i < out.grad.size(); ++i)
                b.grad()[i] += out.grad[i] * a.data()[i]; });
}

inline Tensor scale(Tape &tape, const Tensor &x, double s)
{
    std::vector<double> v(x.data().begin(), x.data().end());
    for (auto &e : v)
        e *= s;
    return tape.record(x.shape(), std::move(v), {x}, [x, s](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (std::size_t i = 0; i < out.grad.size(); ++i)
            x.grad()[i] += s * out.grad[i]; });
}

inline Tensor sum(Tape &tape, const Tensor &x)
{
    const double s = std::accumulate(x.data().begin(), x.data().end(), 0.0);
    return tape.record({1}, {s}, {x}, [x](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (auto &g : x.grad())
            g += out.grad[0]; });
}

// sum_i c_i x_i for constant weights c; used to project outputs in gradient checks.
inline Tensor weighted_sum(Tape &tape, const Tensor &x, std::vector<double> weights)
{
    detail::require(weights.size() == x.size(), "weighted_sum: weight count differs from tensor size");
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        s += weights[i] * x.data()[i];
    return tape.record({1}, {s}, {x}, [x, w = std::move(weights)](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (std::size_t i = 0; i < w.size(); ++i)
            x.grad()[i] += out.grad[0] * w[i]; });
}

// ---- layers -------------------------------------------------------------

// Cross-correlation: y[b,o,t] = bias[o] + sum_{c,j} w[o,c,j] x[b, c, t*stride + j - padding].
inline Tensor conv1d(Tape &tape, const Tensor &x, const Tensor &w, const Tensor &b, std::size_t stride,
                     std::size_t padding)
{
    detail::require(x.rank() == 3 && w.rank() == 3 && b.rank() == 1, "conv1d: expected x (B,C,L), w (O,C,k), b (O)");
    const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    const std::size_t O = w.dim(0), ksz = w.dim(2);
    detail::require(w.dim(1) == C, "conv1d: weight expects " + std::to_string(w.dim(1)) + " input channels, got " +
                                       std::to_string(C));
    detail::require(b.dim(0) == O, "conv1d: bias length differs from output channels");
    detail::require(stride >= 1, "conv1d: stride must be positive");
    detail::require(L + 2 * padding >= ksz, "conv1d: kernel longer than padded input");
    const std::size_t Lo = (L + 2 * padding - ksz) / stride + 1;

    std::vector<double> y(B * O * Lo);
    const auto xv = x.data();
    const auto wv = w.data();
    const auto bv = b.data();
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t o = 0; o < O; ++o)
        {
            double *yr = &y[(n * O + o) * Lo];
            for (std::size_t t = 0; t < Lo; ++t)
                yr[t] = bv[o];
            for (std::size_t c = 0; c < C; ++c)
            {
                const double *xr = &xv[(n * C + c) * L];
                const double *wr = &wv[(o * C + c) * ksz];
                for (std::size_t t = 0; t < Lo; ++t)
                {
                    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) - static_cast<std::ptrdiff_t>(padding);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < ksz; ++j)
                    {
                        const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                        if (pos >= 0 && pos < static_cast<std::ptrdiff_t>(L))
                            acc += wr[j] * xr[pos];
                    }
                    yr[t] += acc;
                }
            }
        }

    return tape.record({B, O, Lo}, std::move(y), {x, w, b},
                       [x, w, b, B, C, L, O, ksz, Lo, stride, padding](const detail::Node &out) mutable
                       {
        const auto &gy = out.grad;
        const bool gx = detail::wants_grad(x), gw = detail::wants_grad(w), gb = detail::wants_grad(b);
        const auto xv = x.data();
        const auto wv = w.data();
        for (std::size_t n = 0; n < B; ++n)
            for (std::size_t o = 0; o < O; ++o)
            {
                const double *gr = &gy[(n * O + o) * Lo];
                if (gb)
                    for (std::size_t t = 0; t < Lo; ++t)
                        b.grad()[o] += gr[t];
                for (std::size_t c = 0; c < C; ++c)
                {
                    const double *xr = &xv[(n * C + c) * L];
                    const double *wr = &wv[(o * C + c) * ksz];
                    for (std::size_t t = 0; t < Lo; ++t)
                    {
                        const double g = gr[t];
                        if (g == 0.0)
                            continue;
                        const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(t * stride) - static_cast<std::ptrdiff_t>(padding);
                        for (std::size_t j = 0; j < ksz; ++j)
                        {
                            const std::ptrdiff_t pos = base + static_cast<std::ptrdiff_t>(j);
                            if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(L))
                                continue;
                            if (gw)
                                w.grad()[(o * C + c) * ksz + j] += g * xr[pos];
                            if (gx)
                                x.grad()[(n * C + c) * L + static_cast<std::size_t>(pos)] += g * wr[j];
                        }
                    }
                }
            } });
}

enum class Mode
{
    Train,
    Eval,
};

struct BatchNormOptions
{
    double eps = 1e-5;
    double momentum = 0.1;
};

// Per-channel normalization over (B, L). Train mode uses batch statistics
// and updates the running buffers in place; eval mode uses the buffers.
inline Tensor batchnorm1d(Tape &tape, const Tensor &x, const Tensor &gamma, const Tensor &beta, Tensor &running_mean,
                          Tensor &running_var, Mode mode, const BatchNormOptions &opt = {})
{
    detail::require(x.rank() == 3, "batchnorm1d: expected (B, C, L) input, got " + shape_string(x.shape()));
    const std::size_t B = x.dim(0), C = x.dim(1), L = x.dim(2);
    detail::require(gamma.size() == C && beta.size() == C && running_mean.size() == C && running_var.size() == C,
                    "batchnorm1d: parameter length differs from channel count");
    const std::size_t count = B * L;
    if (mode == Mode::Train && count <= 1)
        throw DimensionMismatch("batchnorm1d: train mode needs more than one value per channel");

    std::vector<double> mean(C), inv_std(C);
    const auto xv = x.data();
    if (mode == Mode::Train)
    {
        for (std::size_t c = 0; c < C; ++c)
        {
            double s = 0.0;
            for (std::size_t n = 0; n < B; ++n)
                for (std::size_t t = 0; t < L; ++t)
                    s += xv[(n * C + c) * L + t];
            const double mu = s / static_cast<double>(count);
            double ss = 0.0;
            for (std::size_t n = 0; n < B; ++n)
                for (std::size_t t = 0; t < L; ++t)
                {
                    const double d = xv[(n * C + c) * L + t] - mu;
                    ss += d * d;
                }
            const double var = ss / static_cast<double>(count);
            mean[c] = mu;
            inv_std[c] = 1.0 / std::sqrt(var + opt.eps);
            running_mean.data()[c] = (1.0 - opt.momentum) * running_mean.data()[c] + opt.momentum * mu;
            running_var.data()[c] = (1.0 - opt.momentum) * running_var.data()[c] +
                                    opt.momentum * ss / static_cast<double>(count - 1);
        }
    }
    else
    {
        for (std::size_t c = 0; c < C; ++c)
        {
            mean[c] = running_mean.data()[c];
            inv_std[c] = 1.0 / std::sqrt(running_var.data()[c] + opt.eps);
        }
    }

    std::vector<double> xhat(x.size()), y(x.size());
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t t = 0; t < L; ++t)
            {
                const std::size_t i = (n * C + c) * L + t;
                xhat[i] = (xv[i] - mean[c]) * inv_std[c];
                y[i] = gamma.data()[c] * xhat[i] + beta.data()[c];
            }

    return tape.record(x.shape(), std::move(y), {x, gamma, beta},
                       [x, gamma, beta, B, C, L, count, mode, xhat = std::move(xhat),
                        inv_std = std::move(inv_std)](const detail::Node &out) mutable
                       {
        const auto &gy = out.grad;
        for (std::size_t c = 0; c < C; ++c)
        {
            double sum_g = 0.0, sum_gx = 0.0;
            for (std::size_t n = 0; n < B; ++n)
                for (std::size_t t = 0; t < L; ++t)
                {
                    const std::size_t i = (n * C + c) * L + t;
                    sum_g += gy[i];
                    sum_gx += gy[i] * xhat[i];
                }
            if (detail::wants_grad(gamma))
                gamma.grad()[c] += sum_gx;
            if (detail::wants_grad(beta))
                beta.grad()[c] += sum_g;
            if (!detail::wants_grad(x))
                continue;
            const double k = gamma.data()[c] * inv_std[c];
            const double inv_count = 1.0 / static_cast<double>(count);
            for (std::size_t n = 0; n < B; ++n)
                for (std::size_t t = 0; t < L; ++t)
                {
                    const std::size_t i = (n * C + c) * L + t;
                    if (mode == Mode::Train)
                        x.grad()[i] += k * (gy[i] - inv_count * sum_g - xhat[i] * inv_count * sum_gx);
                    else
                        x.grad()[i] += k * gy[i];
                }
        } });
}

// Constants of the exact GELU; exposed so the self-check can inject a fault.
struct GeluCoefficients
{
    double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
};

// x * Phi(x) with Phi the standard normal CDF; derivative Phi(x) + x phi(x).
inline Tensor gelu(Tape &tape, const Tensor &x, const GeluCoefficients &coef = {})
{
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i)
    {
        const double v = x.data()[i];
        y[i] = v * 0.5 * (1.0 + std::erf(v * GeluCoefficients{}.inv_sqrt2));
    }
    return tape.record(x.shape(), std::move(y), {x}, [x, coef](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (std::size_t i = 0; i < out.grad.size(); ++i)
        {
            const double v = x.data()[i];
            const double cdf = 0.5 * (1.0 + std::erf(v * coef.inv_sqrt2));
            const double pdf = coef.inv_sqrt_2pi * std::exp(-0.5 * v * v);
            x.grad()[i] += out.grad[i] * (cdf + v * pdf);
        } });
}

// y = x w^T + b for x (B, F_in), w (F_out, F_in).
inline Tensor linear(Tape &tape, const Tensor &x, const Tensor &w, const Tensor &b)
{
    detail::require(x.rank() == 2 && w.rank() == 2 && b.rank() == 1, "linear: expected x (B,F), w (O,F), b (O)");
    const std::size_t B = x.dim(0), F = x.dim(1), O = w.dim(0);
    detail::require(w.dim(1) == F, "linear: weight expects " + std::to_string(w.dim(1)) + " features, got " +
                                       std::to_string(F));
    detail::require(b.dim(0) == O, "linear: bias length differs from output features");
    std::vector<double> y(B * O);
    const auto xv = x.data();
    const auto wv = w.data();
    for (std::size_t n = 0; n < B; ++n)
    {
        const double *xr = &xv[n * F];
        for (std::size_t o = 0; o < O; ++o)
        {
            const double *wr = &wv[o * F];
            double acc = 0.0;
            for (std::size_t f = 0; f < F; ++f)
                acc += xr[f] * wr[f];
            y[n * O + o] = acc + b.data()[o];
        }
    }
    return tape.record({B, O}, std::move(y), {x, w, b}, [x, w, b, B, F, O](const detail::Node &out) mutable
                       {
        const auto &gy = out.grad;
        const bool gx = detail::wants_grad(x), gw = detail::wants_grad(w), gb = detail::wants_grad(b);
        const auto xv = x.data();
        const auto wv = w.data();
        for (std::size_t n = 0; n < B; ++n)
            for (std::size_t o = 0; o < O; ++o)
            {
                const double g = gy[n * O + o];
                if (g == 0.0)
                    continue;
                if (gb)
                    b.grad()[o] += g;
                if (gw)
                {
                    double *gwr = &w.grad()[o * F];
                    const double *xr = &xv[n * F];
                    for (std::size_t f = 0; f < F; ++f)
                        gwr[f] += g * xr[f];
                }
                if (gx)
                {
                    double *gxr = &x.grad()[n * F];
                    const double *wr = &wv[o * F];
                    for (std::size_t f = 0; f < F; ++f)
                        gxr[f] += g * wr[f];
                }
            } });
}

// Row-wise softmax of (B, N) with the row maximum subtracted.
inline Tensor softmax(Tape &tape, const Tensor &x)
{
    detail::require(x.rank() == 2, "softmax: expected (B, N) input, got " + shape_string(x.shape()));
    const std::size_t B = x.dim(0), N = x.dim(1);
    std::vector<double> y(x.size());
    for (std::size_t r = 0; r < B; ++r)
    {
        const double *xr = &x.data()[r * N];
        double *yr = &y[r * N];
        const double mx = *std::max_element(xr, xr + N);
        double s = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            s += (yr[i] = std::exp(xr[i] - mx));
        for (std::size_t i = 0; i < N; ++i)
            yr[i] /= s;
    }
    return tape.record(x.shape(), y, {x}, [x, y, B, N](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (std::size_t r = 0; r < B; ++r)
        {
            double dot = 0.0;
            for (std::size_t i = 0; i < N; ++i)
                dot += out.grad[r * N + i] * y[r * N + i];
            for (std::size_t i = 0; i < N; ++i)
                x.grad()[r * N + i] += y[r * N + i] * (out.grad[r * N + i] - dot);
        } });
}

// (B * group, C, L) -> (B, group * C * L). Rows of one group are concatenated in order.
inline Tensor flatten(Tape &tape, const Tensor &x, std::size_t group)
{
    detail::require(x.rank() == 3, "flatten: expected (B', C, L) input");
    detail::require(group >= 1 && x.dim(0) % group == 0,
                    "flatten: leading dimension " + std::to_string(x.dim(0)) + " is not divisible by group " +
                        std::to_string(group));
    const std::size_t B = x.dim(0) / group;
    return reshape(tape, x, {B, group * x.dim(1) * x.dim(2)});
}

// Complex directions packed as (B, K*M*N*2) with index ((k*M + m)*N + n)*2 + {re, im}.
// Each (b, k, n) vector over m is scaled to unit norm; norms below `floor` divide by `floor`.
inline Tensor normalize_directions(Tape &tape, const Tensor &x, std::size_t k_sc, std::size_t m_tx,
                                   std::size_t n_ue, double floor = 1e-12)
{
    detail::require(x.rank() == 2 && x.dim(1) == k_sc * m_tx * n_ue * 2,
                    "normalize_directions: expected (B, 2*K*M*N) input, got " + shape_string(x.shape()));
    const std::size_t B = x.dim(0), F = x.dim(1);
    std::vector<double> y(x.size()), norms(B * k_sc * n_ue);
    const auto xv = x.data();
    auto at = [=](std::size_t b, std::size_t k, std::size_t m, std::size_t n, std::size_t c)
    { return b * F + ((k * m_tx + m) * n_ue + n) * 2 + c; };
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t k = 0; k < k_sc; ++k)
            for (std::size_t n = 0; n < n_ue; ++n)
            {
                double s = 0.0;
                for (std::size_t m = 0; m < m_tx; ++m)
                    for (std::size_t c = 0; c < 2; ++c)
                        s += xv[at(b, k, m, n, c)] * xv[at(b, k, m, n, c)];
                const double nrm = std::sqrt(s);
                norms[(b * k_sc + k) * n_ue + n] = nrm;
                const double d = std::max(nrm, floor);
                for (std::size_t m = 0; m < m_tx; ++m)
                    for (std::size_t c = 0; c < 2; ++c)
                        y[at(b, k, m, n, c)] = xv[at(b, k, m, n, c)] / d;
            }
    return tape.record(x.shape(), y, {x}, [x, y, norms, at, B, k_sc, m_tx, n_ue, floor](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t k = 0; k < k_sc; ++k)
                for (std::size_t n = 0; n < n_ue; ++n)
                {
                    const double nrm = norms[(b * k_sc + k) * n_ue + n];
                    if (nrm > floor)
                    {
                        double dot = 0.0;
                        for (std::size_t m = 0; m < m_tx; ++m)
                            for (std::size_t c = 0; c < 2; ++c)
                                dot += y[at(b, k, m, n, c)] * out.grad[at(b, k, m, n, c)];
                        for (std::size_t m = 0; m < m_tx; ++m)
                            for (std::size_t c = 0; c < 2; ++c)
                            {
                                const std::size_t i = at(b, k, m, n, c);
                                x.grad()[i] += (out.grad[i] - y[i] * dot) / nrm;
                            }
                    }
                    else
                    {
                        for (std::size_t m = 0; m < m_tx; ++m)
                            for (std::size_t c = 0; c < 2; ++c)
                            {
                                const std::size_t i = at(b, k, m, n, c);
                                x.grad()[i] += out.grad[i] / floor;
                            }
                    }
                } });
}

// (B, F) -> (B, copies * F), repeating each row `copies` times.
inline Tensor tile_rows(Tape &tape, const Tensor &x, std::size_t copies)
{
    detail::require(x.rank() == 2 && copies >= 1, "tile_rows: expected (B, F) input");
    const std::size_t B = x.dim(0), F = x.dim(1);
    std::vector<double> y(B * copies * F);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t r = 0; r < copies; ++r)
            std::copy_n(&x.data()[b * F], F, &y[(b * copies + r) * F]);
    return tape.record({B, copies * F}, std::move(y), {x}, [x, B, F, copies](const detail::Node &out) mutable
                       {
        if (!detail::wants_grad(x))
            return;
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t r = 0; r < copies; ++r)
                for (std::size_t f = 0; f < F; ++f)
                    x.grad()[b * F + f] += out.grad[(b * copies + r) * F + f];
        });
}

// ---- optimizer ------------------------------------------------------------

struct AdamConfig
{
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Bias-corrected Adam. Moments are allocated on the first step.
class Adam
{
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    const AdamConfig &config() const noexcept { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }
    std::size_t steps() const noexcept { return step_; }

    void step(std::span<Tensor> params)
    {
        if (m_.empty())
            for (const auto &p : params)
            {
                m_.emplace_back(p.size(), 0.0);
                v_.emplace_back(p.size(), 0.0);
            }
        if (m_.size() != params.size())
            throw DimensionMismatch("Adam: parameter list changed between steps");
        ++step_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (std::size_t j = 0; j < params.size(); ++j)
        {
            auto &p = params[j];
            if (m_[j].size() != p.size())
                throw DimensionMismatch("Adam: parameter shape changed between steps");
            if (!p.has_grad())
                continue;
            auto value = p.data();
            const auto g = p.grad();
            for (std::size_t i = 0; i < value.size(); ++i)
            {
                m_[j][i] = cfg_.beta1 * m_[j][i] + (1.0 - cfg_.beta1) * g[i];
                v_[j][i] = cfg_.beta2 * v_[j][i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mh = m_[j][i] / c1;
                const double vh = v_[j][i] / c2;
                value[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
            }
        }
    }

private:
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    std::size_t step_ = 0;
};

} // namespace beamopt::ad
