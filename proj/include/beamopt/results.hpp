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
#include "evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace beamopt
{

class CsvError : public Error
{
public:
    using Error::Error;
};

inline constexpr const char *kResultsHeader = "experiment,method,snr_db,se_mean,se_std,n";

namespace detail
{
// Shortest representation that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline double parse_double(const std::string &s, const std::string &what)
{
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty())
        throw CsvError(what + ": '" + s + "' is not a number");
    return v;
}
} // namespace detail

// Fixed schema: experiment,method,snr_db,se_mean,se_std,n
inline std::string results_to_csv(const std::vector<ResultRow> &rows)
{
    std::string out = std::string(kResultsHeader) + "\n";
    for (const auto &r : rows)
    {
        if (r.experiment.find_first_of(",\n") != std::string::npos || r.method.find_first_of(",\n") != std::string::npos)
            throw CsvError("experiment and method labels may not contain commas or newlines");
        out += r.experiment + "," + r.method + "," + detail::format_double(r.snr_db) + "," +
               detail::format_double(r.se_mean) + "," + detail::format_double(r.se_std) + "," + std::to_string(r.n) + "\n";
    }
    return out;
}

inline void write_results_csv(const std::filesystem::path &path, const std::vector<ResultRow> &rows)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error("cannot write results '" + path.string() + "'");
    os << results_to_csv(rows);
}

inline std::vector<ResultRow> parse_results_csv(const std::string &text)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line))
        throw CsvError("results CSV is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kResultsHeader)
        throw CsvError("unexpected header '" + line + "' (expected '" + kResultsHeader + "')");
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            f.push_back(cell);
        if (!line.empty() && line.back() == ',')
            f.emplace_back();
        const std::string where = "line " + std::to_string(lineno);
        if (f.size() != 6)
            throw CsvError(where + ": expected 6 fields, got " + std::to_string(f.size()));
        ResultRow r;
        r.experiment = f[0];
        r.method = f[1];
        if (r.method.empty())
            throw CsvError(where + ": empty method");
        r.snr_db = detail::parse_double(f[2], where + " snr_db");
        r.se_mean = detail::parse_double(f[3], where + " se_mean");
        r.se_std = detail::parse_double(f[4], where + " se_std");
        const double n = detail::parse_double(f[5], where + " n");
        if (!(n >= 1.0) || n != std::floor(n))
            throw CsvError(where + ": sample count must be a positive integer");
        r.n = static_cast<std::size_t>(n);
        rows.push_back(std::move(r));
    }
    if (rows.empty())
        throw CsvError("results CSV has no data rows");
    return rows;
}

inline std::vector<ResultRow> read_results_csv(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw CsvError("cannot open results '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_results_csv(ss.str());
}

// Line chart of mean spectral efficiency against SNR, one polyline per
// method (per experiment/method pair when several experiments are present).
inline std::string render_svg(const std::vector<ResultRow> &rows)
{
    if (rows.empty())
        throw CsvError("nothing to plot");
    struct Series
    {
        std::string label;
        std::vector<std::pair<double, double>> pts;
    };
    bool multi = std::any_of(rows.begin(), rows.end(), [&](const ResultRow &r)
                             { return r.experiment != rows.front().experiment; });
    std::vector<Series> series;
    for (const auto &r : rows)
    {
        const std::string label = multi ? r.experiment + ": " + r.method : r.method;
        auto it = std::find_if(series.begin(), series.end(), [&](const Series &s)
                               { return s.label == label; });
        if (it == series.end())
        {
            series.push_back({label, {}});
            it = series.end() - 1;
        }
        it->pts.emplace_back(r.snr_db, r.se_mean);
    }
    for (auto &s : series)
        std::stable_sort(s.pts.begin(), s.pts.end());

    double x0 = rows.front().snr_db, x1 = x0, y1 = 0.0;
    for (const auto &r : rows)
    {
        x0 = std::min(x0, r.snr_db);
        x1 = std::max(x1, r.snr_db);
        y1 = std::max(y1, r.se_mean);
    }
    if (x1 == x0)
    {
        x0 -= 1.0;
        x1 += 1.0;
    }
    y1 = y1 > 0.0 ? y1 * 1.1 : 1.0;

    const double W = 720, H = 460, left = 70, right = 190, top = 30, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x)
    { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y)
    { return top + ph - y / y1 * ph; };
    auto f2 = [](double v)
    {
        char b[32];
        std::snprintf(b, sizeof(b), "%.2f", v);
        return std::string(b);
    };
    static const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + f2(W) + "\" height=\"" + f2(H) + "\" viewBox=\"0 0 " +
           f2(W) + " " + f2(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + f2(W) + "\" height=\"" + f2(H) + "\" fill=\"white\"/>\n";
    svg += "<rect x=\"" + f2(left) + "\" y=\"" + f2(top) + "\" width=\"" + f2(pw) + "\" height=\"" + f2(ph) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i)
    {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y1 * i / 5.0;
        svg += "<line x1=\"" + f2(px(xv)) + "\" y1=\"" + f2(top + ph) + "\" x2=\"" + f2(px(xv)) + "\" y2=\"" +
               f2(top + ph + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + f2(px(xv)) + "\" y=\"" + f2(top + ph + 20) + "\" text-anchor=\"middle\">" + f2(xv) + "</text>\n";
        svg += "<line x1=\"" + f2(left - 5) + "\" y1=\"" + f2(py(yv)) + "\" x2=\"" + f2(left) + "\" y2=\"" + f2(py(yv)) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + f2(left - 8) + "\" y=\"" + f2(py(yv) + 4) + "\" text-anchor=\"end\">" + f2(yv) + "</text>\n";
    }
    svg += "<text x=\"" + f2(left + pw / 2) + "\" y=\"" + f2(H - 15) + "\" text-anchor=\"middle\">SNR (dB)</text>\n";
    svg += "<text x=\"18\" y=\"" + f2(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
           f2(top + ph / 2) + ")\">Spectral efficiency (bps/Hz)</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s)
    {
        const char *color = palette[s % (sizeof(palette) / sizeof(palette[0]))];
        std::string pts;
        for (const auto &[x, y] : series[s].pts)
            pts += (pts.empty() ? "" : " ") + f2(px(x)) + "," + f2(py(y));
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        for (const auto &[x, y] : series[s].pts)
            svg += "<circle cx=\"" + f2(px(x)) + "\" cy=\"" + f2(py(y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        const double ly = top + 15 + 20.0 * static_cast<double>(s);
        svg += "<line x1=\"" + f2(left + pw + 15) + "\" y1=\"" + f2(ly) + "\" x2=\"" + f2(left + pw + 40) + "\" y2=\"" +
               f2(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        std::string label;
        for (char c : series[s].label)
            label += c == '<' ? "&lt;" : c == '>' ? "&gt;" : c == '&' ? "&amp;" : std::string(1, c);
        svg += "<text x=\"" + f2(left + pw + 45) + "\" y=\"" + f2(ly + 4) + "\">" + label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace beamopt
