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
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace beamopt
{

using cdouble = std::complex<double>;

namespace detail
{
inline bool all_finite(std::span<const cdouble> v)
{
    return std::all_of(v.begin(), v.end(), [](const cdouble &z)
                       { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}
} // namespace detail

// Dense complex column vector.
class CVector
{
public:
    CVector() = default;
    explicit CVector(std::size_t len) : data_(len) {}
    CVector(std::vector<cdouble> data) : data_(std::move(data))
    {
        if (!detail::all_finite(data_))
            throw NonFiniteValue("CVector: non-finite entry");
    }
    CVector(std::initializer_list<cdouble> init) : CVector(std::vector<cdouble>(init)) {}

    std::size_t size() const noexcept { return data_.size(); }
    cdouble &operator[](std::size_t i) { return data_[i]; }
    const cdouble &operator[](std::size_t i) const { return data_[i]; }
    std::span<const cdouble> values() const noexcept { return data_; }
    std::span<cdouble> values() noexcept { return data_; }

    friend bool operator==(const CVector &, const CVector &) = default;

private:
    std::vector<cdouble> data_;
};

// Dense complex matrix, row-major.
class CMatrix
{
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cdouble> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_)
            throw DimensionMismatch("CMatrix: data length " + std::to_string(data_.size()) +
                                    " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
        if (!detail::all_finite(data_))
            throw NonFiniteValue("CMatrix: non-finite entry");
    }
    // Row-wise literal, e.g. CMatrix{{1, 2}, {3, 4}}.
    CMatrix(std::initializer_list<std::initializer_list<cdouble>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto &r : rows)
        {
            if (r.size() != cols_)
                throw DimensionMismatch("CMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
        if (!detail::all_finite(data_))
            throw NonFiniteValue("CMatrix: non-finite entry");
    }

    static CMatrix identity(std::size_t n)
    {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    static CMatrix diagonal(std::span<const cdouble> d)
    {
        CMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    cdouble &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cdouble &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const cdouble> values() const noexcept { return data_; }
    std::span<cdouble> values() noexcept { return data_; }

    CVector col(std::size_t c) const
    {
        CVector v(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            v[r] = (*this)(r, c);
        return v;
    }

    void set_col(std::size_t c, const CVector &v)
    {
        if (v.size() != rows_)
            throw DimensionMismatch("CMatrix::set_col: length mismatch");
        for (std::size_t r = 0; r < rows_; ++r)
            (*this)(r, c) = v[r];
    }

    friend bool operator==(const CMatrix &, const CMatrix &) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cdouble> data_;
};

inline CMatrix matmul(const CMatrix &a, const CMatrix &b)
{
    if (a.cols() != b.rows())
        throw DimensionMismatch("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    CMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k)
        {
            const cdouble aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                c(i, j) += aik * b(k, j);
        }
    return c;
}

inline CVector matvec(const CMatrix &a, const CVector &x)
{
    if (a.cols() != x.size())
        throw DimensionMismatch("matvec: inner dimensions differ");
    CVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
    {
        cdouble acc = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k)
            acc += a(i, k) * x[k];
        y[i] = acc;
    }
    return y;
}

inline CMatrix transpose(const CMatrix &a)
{
    CMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = a(i, j);
    return t;
}

inline CMatrix conj(const CMatrix &a)
{
    CMatrix c = a;
    for (auto &z : c.values())
        z = std::conj(z);
    return c;
}

inline CMatrix hermitian(const CMatrix &a)
{
    CMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            t(j, i) = std::conj(a(i, j));
    return t;
}

inline CMatrix add(const CMatrix &a, const CMatrix &b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("add: shapes differ");
    CMatrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < cv.size(); ++i)
        cv[i] += bv[i];
    return c;
}

inline CMatrix scale(const CMatrix &a, cdouble s)
{
    CMatrix c = a;
    for (auto &z : c.values())
        z *= s;
    return c;
}

// Sum of |entries|^2, square-rooted.
inline double frobenius(const CMatrix &a)
{
    double s = 0.0;
    for (const auto &z : a.values())
        s += std::norm(z);
    return std::sqrt(s);
}

inline double norm2(const CVector &v)
{
    double s = 0.0;
    for (const auto &z : v.values())
        s += std::norm(z);
    return std::sqrt(s);
}

// v^H u
inline cdouble inner(const CVector &v, const CVector &u)
{
    if (v.size() != u.size())
        throw DimensionMismatch("inner: length mismatch");
    cdouble s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += std::conj(v[i]) * u[i];
    return s;
}

// LU factorization with partial pivoting, PA = LU packed in one matrix.
class LuDecomposition
{
public:
    // A pivot counts as singular when |pivot| <= kPivotTolerance * (largest |entry| of its original row).
    static constexpr double kPivotTolerance = 1e-12;

    explicit LuDecomposition(const CMatrix &a) : lu_(a), perm_(a.rows())
    {
        if (a.rows() != a.cols())
            throw DimensionMismatch("LU: matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                    ", expected square");
        const std::size_t n = a.rows();
        std::vector<double> row_scale(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
        {
            perm_[i] = i;
            for (std::size_t j = 0; j < n; ++j)
                row_scale[i] = std::max(row_scale[i], std::abs(a(i, j)));
        }

        for (std::size_t k = 0; k < n; ++k)
        {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i)
                if (double v = std::abs(lu_(i, k)); v > best)
                {
                    best = v;
                    p = i;
                }
            if (!(best > kPivotTolerance * row_scale[perm_[p]]))
                throw SingularMatrix(k, "LU: matrix is singular to working precision");
            if (p != k)
            {
                for (std::size_t j = 0; j < n; ++j)
                    std::swap(lu_(k, j), lu_(p, j));
                std::swap(perm_[k], perm_[p]);
            }
            const cdouble pivot = lu_(k, k);
            for (std::size_t i = k + 1; i < n; ++i)
            {
                const cdouble f = lu_(i, k) / pivot;
                lu_(i, k) = f;
                if (f == cdouble(0.0))
                    continue;
                for (std::size_t j = k + 1; j < n; ++j)
                    lu_(i, j) -= f * lu_(k, j);
            }
        }
    }

    std::size_t size() const noexcept { return lu_.rows(); }

    CMatrix solve(const CMatrix &b) const
    {
        const std::size_t n = size();
        if (b.rows() != n)
            throw DimensionMismatch("solve: rhs has " + std::to_string(b.rows()) + " rows, expected " +
                                    std::to_string(n));
        CMatrix x(n, b.cols());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < b.cols(); ++j)
                x(i, j) = b(perm_[i], j);
        for (std::size_t j = 0; j < b.cols(); ++j)
        {
            for (std::size_t i = 1; i < n; ++i)
            {
                cdouble s = x(i, j);
                for (std::size_t k = 0; k < i; ++k)
                    s -= lu_(i, k) * x(k, j);
                x(i, j) = s;
            }
            for (std::size_t ii = n; ii-- > 0;)
            {
                cdouble s = x(ii, j);
                for (std::size_t k = ii + 1; k < n; ++k)
                    s -= lu_(ii, k) * x(k, j);
                x(ii, j) = s / lu_(ii, ii);
            }
        }
        return x;
    }

    CVector solve(const CVector &b) const
    {
        CMatrix bm(b.size(), 1, std::vector<cdouble>(b.values().begin(), b.values().end()));
        return solve(bm).col(0);
    }

private:
    CMatrix lu_;
    std::vector<std::size_t> perm_;
};

// Solves a X = b.
inline CMatrix solve(const CMatrix &a, const CMatrix &b)
{
    if (a.rows() != a.cols())
        throw DimensionMismatch("solve: coefficient matrix is not square");
    if (b.rows() != a.rows())
        throw DimensionMismatch("solve: rhs rows differ from coefficient rows");
    return LuDecomposition(a).solve(b);
}

inline CMatrix inverse(const CMatrix &a)
{
    return solve(a, CMatrix::identity(a.rows()));
}

} // namespace beamopt
