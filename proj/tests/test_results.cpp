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

#include "test_util.hpp"

#include <filesystem>

using namespace beamopt;

namespace
{

std::vector<ResultRow> sample_rows()
{
    std::vector<ResultRow> rows;
    for (const std::string m : {"ZF", "NNBF-P"})
        for (double snr : {0.0, 10.0, -2.5})
            rows.push_back({"exp", m, snr, 1.0 / 3.0 + snr * 0.1 + (m == "ZF" ? 0.0 : 0.7), 0.1 + snr / 7.0, 17});
    return rows;
}

std::size_t count(const std::string &s, const std::string &what)
{
    std::size_t n = 0;
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1))
        ++n;
    return n;
}

} // namespace

TEST(ResultsCsv, RoundTripIsExact)
{
    const auto rows = sample_rows();
    const std::string text = results_to_csv(rows);
    EXPECT_EQ(text.substr(0, text.find('\n')), kResultsHeader);
    const auto back = parse_results_csv(text);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        EXPECT_EQ(back[i].experiment, rows[i].experiment);
        EXPECT_EQ(back[i].method, rows[i].method);
        EXPECT_EQ(back[i].snr_db, rows[i].snr_db);
        EXPECT_EQ(back[i].se_mean, rows[i].se_mean);
        EXPECT_EQ(back[i].se_std, rows[i].se_std);
        EXPECT_EQ(back[i].n, rows[i].n);
    }
    EXPECT_EQ(results_to_csv(back), text);
}

TEST(ResultsCsv, FileRoundTrip)
{
    const auto path = std::filesystem::temp_directory_path() / "beamopt_results_roundtrip.csv";
    write_results_csv(path, sample_rows());
    EXPECT_EQ(read_results_csv(path).size(), 6u);
    std::filesystem::remove(path);
    EXPECT_THROW(read_results_csv(path), CsvError);
}

TEST(ResultsCsv, RejectsMalformedInput)
{
    const std::string h = std::string(kResultsHeader) + "\n";
    EXPECT_THROW(parse_results_csv(""), CsvError);
    EXPECT_THROW(parse_results_csv(h), CsvError);
    EXPECT_THROW(parse_results_csv("a,b,c\nx,ZF,0,1,0,1\n"), CsvError);
    EXPECT_THROW(parse_results_csv(h + "x,ZF,0,1,0\n"), CsvError);
    EXPECT_THROW(parse_results_csv(h + "x,ZF,0,1,0,1,\n"), CsvError);
    EXPECT_THROW(parse_results_csv(h + "x,ZF,zero,1,0,1\n"), CsvError);
    EXPECT_THROW(parse_results_csv(h + "x,ZF,0,1.5x,0,1\n"), CsvError);
    EXPECT_THROW(parse_results_csv(h + "x,,0,1,0,1\n"), CsvError);
    EXPECT_THROW(parse_results_csv(h + "x,ZF,0,1,0,2.5\n"), CsvError);
    EXPECT_NO_THROW(parse_results_csv(h + "x,ZF,0,1,0,1\r\n\n"));
}

TEST(Svg, OnePolylinePerMethod)
{
    const std::string svg = render_svg(sample_rows());
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(count(svg, "<polyline"), 2u);
    EXPECT_EQ(count(svg, "<circle"), 6u);
    EXPECT_NE(svg.find(">ZF</text>"), std::string::npos);
    EXPECT_NE(svg.find(">NNBF-P</text>"), std::string::npos);
    // Each polyline has three points.
    for (auto pos = svg.find("points=\""); pos != std::string::npos; pos = svg.find("points=\"", pos + 1))
    {
        const auto end = svg.find('"', pos + 8);
        EXPECT_EQ(count(svg.substr(pos + 8, end - pos - 8), ","), 3u);
    }
}

TEST(Svg, DeterministicAndEscaped)
{
    auto rows = sample_rows();
    EXPECT_EQ(render_svg(rows), render_svg(rows));
    rows[0].method = rows[1].method = rows[2].method = "A<B&C";
    const std::string svg = render_svg(rows);
    EXPECT_NE(svg.find("A&lt;B&amp;C"), std::string::npos);
    EXPECT_THROW(render_svg({}), CsvError);
    // A single SNR point still renders.
    EXPECT_NO_THROW(render_svg({rows[0]}));
}
