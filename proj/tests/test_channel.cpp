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

#include <numbers>

using namespace beamopt;
using namespace beamopt::testing;

TEST(Profile, PowersNormalizedForBothTables)
{
    for (ProfileId id : {ProfileId::TdlA, ProfileId::TdlC})
    {
        const TdlProfile p = TdlProfile::load(id);
        double total = 0.0;
        for (double v : p.linear_powers())
            total += v;
        EXPECT_NEAR(total, 1.0, 1e-12) << p.name();
        for (std::size_t i = 1; i < p.taps().size(); ++i)
            EXPECT_GT(p.taps()[i].normalized_delay, p.taps()[i - 1].normalized_delay);
        EXPECT_GE(p.taps().front().normalized_delay, 0.0);
    }
}

TEST(Profile, RejectsDuplicateOrNegativeDelays)
{
    EXPECT_THROW(TdlProfile(ProfileId::Custom, {{0.0, 0.0}, {0.0, -3.0}}), ConfigError);
    EXPECT_THROW(TdlProfile(ProfileId::Custom, {{-1.0, 0.0}}), ConfigError);
    EXPECT_THROW(TdlProfile(ProfileId::Custom, {}), ConfigError);
    EXPECT_THROW(profile_from_string("TDL-Z"), ConfigError);
    EXPECT_EQ(profile_from_string("TDL-C"), ProfileId::TdlC);
}

TEST(GenTaps, TdlaDelaysScaleWithDelaySpread)
{
    // TR 38.901 Table 7.7.2-1 normalized delays, in ascending order.
    const std::vector<double> tdl_a = {0.0000, 0.3819, 0.4025, 0.4610, 0.5375, 0.5750, 0.5868, 0.6708,
                                       0.7618, 1.5375, 1.8978, 2.1718, 2.2242, 2.4942, 2.5119, 3.0582,
                                       4.0810, 4.4579, 4.5695, 4.7966, 5.0066, 5.3043, 9.6586};
    Rng rng(1);
    const auto taps = gen_taps(TdlProfile::load(ProfileId::TdlA), 30.0, rng);
    ASSERT_EQ(taps.size(), tdl_a.size());
    for (std::size_t l = 0; l < taps.size(); ++l)
        EXPECT_NEAR(taps[l].delay_s, tdl_a[l] * 30e-9, 1e-22);
}

TEST(GenTaps, SingleTapHasUnitPower)
{
    Rng rng(2);
    const TdlProfile p = TdlProfile::single_tap();
    double acc = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
    {
        const auto taps = gen_taps(p, 30.0, rng);
        ASSERT_EQ(taps.size(), 1u);
        acc += std::norm(taps[0].gain);
    }
    // Sample mean of an Exp(1) variable: sd 1/sqrt(1e5) ~ 0.003.
    EXPECT_NEAR(acc / draws, 1.0, 0.02);
}

TEST(GenTaps, TwoEqualTapsSplitPower)
{
    Rng rng(3);
    const TdlProfile p(ProfileId::Custom, {{0.0, 0.0}, {1.0, 0.0}});
    double a = 0.0, b = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
    {
        const auto taps = gen_taps(p, 100.0, rng);
        a += std::norm(taps[0].gain);
        b += std::norm(taps[1].gain);
    }
    EXPECT_NEAR(a / draws, 0.5, 0.025);
    EXPECT_NEAR(b / draws, 0.5, 0.025);
}

TEST(TapsToFreq, DeltaAtOriginIsFlat)
{
    const std::vector<ChannelTap> unit{{0.0, 1.0}};
    const auto flat = taps_to_freq(unit, 12, 30e3);
    for (const auto &z : flat.values())
        EXPECT_EQ(z, cdouble(1.0));
    const cdouble g(0.3, -0.7);
    const std::vector<ChannelTap> scaled{{0.0, g}};
    const auto shifted = taps_to_freq(scaled, 12, 30e3);
    for (const auto &z : shifted.values())
        EXPECT_EQ(z, g);
}

TEST(TapsToFreq, TwoTapsMatchDirectSum)
{
    const std::vector<ChannelTap> taps{{0.0, cdouble(0.8, 0.1)}, {250e-9, cdouble(-0.2, 0.5)}};
    const std::size_t K = 48;
    const double scs = 30e3;
    const CVector h = taps_to_freq(taps, K, scs);
    for (std::size_t k = 0; k < K; ++k)
    {
        double re = 0.0, im = 0.0;
        for (const auto &t : taps)
        {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) * scs * t.delay_s;
            re += t.gain.real() * std::cos(ang) - t.gain.imag() * std::sin(ang);
            im += t.gain.real() * std::sin(ang) + t.gain.imag() * std::cos(ang);
        }
        EXPECT_NEAR(h[k].real(), re, 1e-12);
        EXPECT_NEAR(h[k].imag(), im, 1e-12);
    }
}

TEST(UeSnrs, ZeroJitterIsNominal)
{
    Rng rng(4);
    for (double s : draw_ue_snrs(7.5, 0.0, JitterDistribution::Gaussian, 5, rng))
        EXPECT_EQ(s, 7.5);
}

TEST(UeSnrs, GaussianJitterStatistics)
{
    Rng rng(5);
    const auto s = draw_ue_snrs(5.0, 20.0, JitterDistribution::Gaussian, 100000, rng);
    double mean = 0.0;
    for (double v : s)
    {
        EXPECT_GE(v, -15.0);
        EXPECT_LE(v, 25.0);
        mean += v;
    }
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(s.size() - 1);
    // Std of N(0, 10^2) clipped at +-2 sigma:
    // E[Z^2; |Z|<2] + 4 P(|Z|>2) = erf(sqrt2) - 4 phi(2) + 4 erfc(sqrt2).
    const double phi2 = std::exp(-2.0) / std::sqrt(2.0 * std::numbers::pi);
    const double clipped_sd =
        10.0 * std::sqrt(std::erf(std::numbers::sqrt2) - 4.0 * phi2 + 4.0 * std::erfc(std::numbers::sqrt2));
    EXPECT_NEAR(mean, 5.0, 0.15);
    EXPECT_NEAR(std::sqrt(var), clipped_sd, 0.15);
    EXPECT_NEAR(clipped_sd, 9.6, 0.05); // ~10 dB before clipping
}

TEST(GenChannel, ShapeUsesTwelveSubcarriersPerBlock)
{
    Rng rng(6);
    ChannelSpec spec;
    spec.num_rb = 4;
    const ChannelMatrix h = gen_channel(spec, rng);
    EXPECT_EQ(h.k_sc, 48u);
    EXPECT_EQ(h.m_tx, 4u);
    EXPECT_EQ(h.n_ue, 4u);
    EXPECT_EQ(h.h.size(), 48u * 16u);
    EXPECT_EQ(h.per_ue_snr_db.size(), 4u);
    EXPECT_NO_THROW(h.validate());
}

TEST(GenChannel, SingleTapScalarIsUnitPowerRayleigh)
{
    Rng rng(7);
    ChannelSpec spec = small_spec(1, 1, 1);
    spec.profile = TdlProfile::single_tap();
    double acc = 0.0, acc4 = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
    {
        const double p = std::norm(gen_channel(spec, rng)(0, 0, 0));
        acc += p;
        acc4 += p * p;
    }
    EXPECT_NEAR(acc / draws, 1.0, 0.03);
    // Rayleigh amplitude: |h|^2 ~ Exp(1) has E[|h|^4] = 2.
    EXPECT_NEAR(acc4 / draws, 2.0, 0.1);
}

TEST(GenChannel, DistinctAntennaPairsUncorrelated)
{
    Rng rng(8);
    ChannelSpec spec = small_spec(2, 2, 1);
    spec.profile = TdlProfile::single_tap();
    const int draws = 100000;
    std::vector<cdouble> cross(3, 0.0);
    for (int i = 0; i < draws; ++i)
    {
        const ChannelMatrix h = gen_channel(spec, rng);
        const cdouble a = h(0, 0, 0);
        cross[0] += a * std::conj(h(0, 0, 1));
        cross[1] += a * std::conj(h(0, 1, 0));
        cross[2] += a * std::conj(h(0, 1, 1));
    }
    for (const auto &c : cross)
        EXPECT_LT(std::abs(c) / draws, 0.02);
}

TEST(GenChannel, FrequencyDomainEnergyIsOne)
{
    Rng rng(9);
    for (ProfileId id : {ProfileId::TdlA, ProfileId::TdlC})
    {
        ChannelSpec spec = small_spec(1, 1, 48);
        spec.profile = TdlProfile::load(id);
        spec.delay_spread_ns = 300.0;
        double acc = 0.0;
        const int draws = 20000;
        for (int i = 0; i < draws; ++i)
        {
            const ChannelMatrix h = gen_channel(spec, rng);
            for (std::size_t k = 0; k < h.k_sc; ++k)
                acc += std::norm(h(k, 0, 0));
        }
        EXPECT_NEAR(acc / (draws * 48.0), 1.0, 0.03) << to_string(id);
    }
}

TEST(GenChannel, SameSeedSameChannel)
{
    const ChannelSpec spec = small_spec(3, 2, 8);
    Rng a(10), b(10);
    EXPECT_EQ(gen_channel(spec, a), gen_channel(spec, b));
}

TEST(GenChannel, InvalidSpecRejected)
{
    Rng rng(11);
    ChannelSpec spec;
    spec.delay_spread_ns = 0.0;
    EXPECT_THROW(gen_channel(spec, rng), ConfigError);
    spec = ChannelSpec{};
    spec.n_ue = 0;
    EXPECT_THROW(gen_channel(spec, rng), ConfigError);
}

TEST(NoiseVariance, DecibelConversion)
{
    EXPECT_DOUBLE_EQ(noise_variance(0.0), 1.0);
    EXPECT_DOUBLE_EQ(noise_variance(10.0), 0.1);
    EXPECT_DOUBLE_EQ(noise_variance(-20.0), 100.0);
}
