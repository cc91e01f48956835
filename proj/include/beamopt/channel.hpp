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
#include "linalg.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace beamopt
{

enum class ProfileId : std::uint32_t
{
    Custom = 0,
    TdlA = 1,
    TdlC = 3,
};

inline std::string to_string(ProfileId id)
{
    switch (id)
    {
    case ProfileId::TdlA:
        return "TDL-A";
    case ProfileId::TdlC:
        return "TDL-C";
    default:
        return "custom";
    }
}

inline ProfileId profile_from_string(std::string_view s)
{
    if (s == "TDL-A")
        return ProfileId::TdlA;
    if (s == "TDL-C")
        return ProfileId::TdlC;
    throw ConfigError("profile", "unknown delay profile '" + std::string(s) + "' (expected TDL-A or TDL-C)");
}

struct Tap
{
    double normalized_delay; // multiples of the RMS delay spread
    double power_db;
};

// Tapped-delay-line power-delay profile. Taps are kept sorted by delay and
// the linear powers are normalized to sum to one.
class TdlProfile
{
public:
    TdlProfile(ProfileId id, std::vector<Tap> taps) : id_(id), taps_(std::move(taps))
    {
        if (taps_.empty())
            throw ConfigError("profile", "delay profile has no taps");
        std::sort(taps_.begin(), taps_.end(),
                  [](const Tap &a, const Tap &b)
                  { return a.normalized_delay < b.normalized_delay; });
        for (std::size_t i = 0; i < taps_.size(); ++i)
        {
            if (!(taps_[i].normalized_delay >= 0.0) || !std::isfinite(taps_[i].power_db))
                throw ConfigError("profile", "tap delays must be non-negative and powers finite");
            if (i > 0 && !(taps_[i].normalized_delay > taps_[i - 1].normalized_delay))
                throw ConfigError("profile", "tap delays must be distinct");
        }
        double total = 0.0;
        linear_.reserve(taps_.size());
        for (const auto &t : taps_)
            total += linear_.emplace_back(std::pow(10.0, t.power_db / 10.0));
        for (auto &p : linear_)
            p /= total;
    }

    static TdlProfile single_tap() { return TdlProfile(ProfileId::Custom, {{0.0, 0.0}}); }

    static TdlProfile load(ProfileId id)
    {
        // 3GPP TR 38.901 Table 7.7.2-1 (TDL-A) and Table 7.7.2-3 (TDL-C).
        static const std::vector<Tap> tdl_a = {
            {0.0000, -13.4}, {0.3819, 0.0}, {0.4025, -2.2}, {0.5868, -4.0}, {0.4610, -6.0}, {0.5375, -8.2},
            {0.6708, -9.9}, {0.5750, -10.5}, {0.7618, -7.5}, {1.5375, -15.9}, {1.8978, -6.6}, {2.2242, -16.7},
            {2.1718, -12.4}, {2.4942, -15.2}, {2.5119, -10.8}, {3.0582, -11.3}, {4.0810, -12.7}, {4.4579, -16.2},
            {4.5695, -18.3}, {4.7966, -18.9}, {5.0066, -16.6}, {5.3043, -19.9}, {9.6586, -29.7}};
        static const std::vector<Tap> tdl_c = {
            {0.0000, -4.4}, {0.2099, -1.2}, {0.2219, -3.5}, {0.2329, -5.2}, {0.2176, -2.5}, {0.6366, 0.0},
            {0.6448, -2.2}, {0.6560, -3.9}, {0.6584, -7.4}, {0.7935, -7.1}, {0.8213, -10.7}, {0.9336, -11.1},
            {1.2285, -5.1}, {1.3083, -6.8}, {2.1704, -8.7}, {2.7105, -13.2}, {4.2589, -13.9}, {4.6003, -13.9},
            {5.4902, -15.8}, {5.6077, -17.1}, {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8}};
        switch (id)
        {
        case ProfileId::TdlA:
            return TdlProfile(id, tdl_a);
        case ProfileId::TdlC:
            return TdlProfile(id, tdl_c);
        default:
            throw ConfigError("profile", "no tabulated taps for custom profile");
        }
    }

    ProfileId id() const noexcept { return id_; }
    std::string name() const { return to_string(id_); }
    const std::vector<Tap> &taps() const noexcept { return taps_; }
    const std::vector<double> &linear_powers() const noexcept { return linear_; }

    friend bool operator==(const TdlProfile &a, const TdlProfile &b)
    {
        if (a.id_ != b.id_ || a.taps_.size() != b.taps_.size())
            return false;
        for (std::size_t i = 0; i < a.taps_.size(); ++i)
            if (a.taps_[i].normalized_delay != b.taps_[i].normalized_delay || a.taps_[i].power_db != b.taps_[i].power_db)
                return false;
        return true;
    }

private:
    ProfileId id_;
    std::vector<Tap> taps_;
    std::vector<double> linear_;
};

struct ChannelTap
{
    double delay_s;
    cdouble gain;
};

// One Rayleigh realization of the profile; tap l has E|g_l|^2 equal to its normalized power.
inline std::vector<ChannelTap> gen_taps(const TdlProfile &profile, double delay_spread_ns, Rng &rng)
{
    if (!(delay_spread_ns > 0.0))
        throw ConfigError("delay_spread_ns", "must be positive");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<ChannelTap> out;
    out.reserve(profile.taps().size());
    for (std::size_t l = 0; l < profile.taps().size(); ++l)
    {
        const double sd = std::sqrt(profile.linear_powers()[l] / 2.0);
        const double re = gauss(rng);
        const double im = gauss(rng);
        out.push_back({profile.taps()[l].normalized_delay * delay_spread_ns * 1e-9, cdouble(sd * re, sd * im)});
    }
    return out;
}

// H(f_k) = sum_l g_l exp(-j 2 pi f_k tau_l), f_k = k * scs_hz.
inline CVector taps_to_freq(std::span<const ChannelTap> taps, std::size_t k_sc, double scs_hz)
{
    if (k_sc == 0 || !(scs_hz > 0.0))
        throw ConfigError("k_sc/scs_hz", "need at least one subcarrier and positive spacing");
    CVector h(k_sc);
    for (std::size_t k = 0; k < k_sc; ++k)
    {
        const double f = static_cast<double>(k) * scs_hz;
        cdouble acc = 0.0;
        for (const auto &t : taps)
            acc += t.gain * std::polar(1.0, -2.0 * std::numbers::pi * f * t.delay_s);
        h[k] = acc;
    }
    return h;
}

enum class JitterDistribution
{
    Gaussian,
};

// snr_n = nominal + d_n, d_n ~ N(0, (jitter/2)^2) clipped to +-jitter.
inline std::vector<double> draw_ue_snrs(double nominal_snr_db, double jitter_db, JitterDistribution dist,
                                        std::size_t n_ue, Rng &rng)
{
    if (n_ue == 0)
        throw ConfigError("n_ue", "must be at least 1");
    std::vector<double> snr(n_ue, nominal_snr_db);
    if (jitter_db <= 0.0)
        return snr;
    switch (dist)
    {
    case JitterDistribution::Gaussian:
    {
        std::normal_distribution<double> gauss(0.0, jitter_db / 2.0);
        for (auto &s : snr)
            s = nominal_snr_db + std::clamp(gauss(rng), -jitter_db, jitter_db);
        break;
    }
    }
    return snr;
}

// Per-UE noise variance for unit per-UE reference power and unit average channel gain.
inline double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

// Per-subcarrier downlink channel, entries h(k, m, n) stored (K, M, N) row-major.
// per_ue_snr_db holds each UE's SNR offset relative to the nominal operating point.
struct ChannelMatrix
{
    std::size_t m_tx = 0, n_ue = 0, k_sc = 0;
    std::vector<cdouble> h;
    std::vector<double> per_ue_snr_db;

    ChannelMatrix() = default;
    ChannelMatrix(std::size_t m, std::size_t n, std::size_t k)
        : m_tx(m), n_ue(n), k_sc(k), h(m * n * k), per_ue_snr_db(n, 0.0) {}

    cdouble &operator()(std::size_t k, std::size_t m, std::size_t n) { return h[(k * m_tx + m) * n_ue + n]; }
    const cdouble &operator()(std::size_t k, std::size_t m, std::size_t n) const
    {
        return h[(k * m_tx + m) * n_ue + n];
    }

    // M x N channel at subcarrier k; column n is UE n's channel vector.
    CMatrix slice(std::size_t k) const
    {
        const auto first = h.begin() + static_cast<std::ptrdiff_t>(k * m_tx * n_ue);
        return CMatrix(m_tx, n_ue, std::vector<cdouble>(first, first + static_cast<std::ptrdiff_t>(m_tx * n_ue)));
    }

    void validate() const
    {
        if (h.size() != m_tx * n_ue * k_sc || per_ue_snr_db.size() != n_ue)
            throw DimensionMismatch("ChannelMatrix: storage does not match (K, M, N)");
        if (!detail::all_finite(h))
            throw NonFiniteValue("ChannelMatrix: non-finite entry");
    }

    friend bool operator==(const ChannelMatrix &, const ChannelMatrix &) = default;
};

// Channel-generation parameters of one experiment.
struct ChannelSpec
{
    TdlProfile profile = TdlProfile::load(ProfileId::TdlA);
    double delay_spread_ns = 30.0;
    std::size_t m_tx = 4;
    std::size_t n_ue = 4;
    std::size_t num_rb = 4;
    std::size_t subcarriers = 0; // explicit K; 0 means 12 per resource block
    double scs_hz = 30e3;
    double doppler_hz = 10.0; // metadata: each sample is one coherence-time snapshot
    double jitter_db = 20.0;
    JitterDistribution jitter_dist = JitterDistribution::Gaussian;

    std::size_t k_sc() const noexcept { return subcarriers ? subcarriers : 12 * num_rb; }

    void validate() const
    {
        if (m_tx == 0 || n_ue == 0)
            throw ConfigError("m_tx/n_ue", "antenna and UE counts must be positive");
        if (k_sc() == 0)
            throw ConfigError("num_rb", "at least one subcarrier is required");
        if (!(delay_spread_ns > 0.0))
            throw ConfigError("delay_spread_ns", "must be positive");
        if (!(scs_hz > 0.0))
            throw ConfigError("scs_hz", "must be positive");
        if (!(jitter_db >= 0.0))
            throw ConfigError("jitter_db", "must be non-negative");
    }

    friend bool operator==(const ChannelSpec &, const ChannelSpec &) = default;
};

// Independent taps per (tx antenna, UE) pair, then per-UE SNR offsets.
inline ChannelMatrix gen_channel(const ChannelSpec &spec, Rng &rng)
{
    spec.validate();
    const std::size_t k_sc = spec.k_sc();
    ChannelMatrix ch(spec.m_tx, spec.n_ue, k_sc);
    for (std::size_t m = 0; m < spec.m_tx; ++m)
        for (std::size_t n = 0; n < spec.n_ue; ++n)
        {
            const auto taps = gen_taps(spec.profile, spec.delay_spread_ns, rng);
            const CVector resp = taps_to_freq(taps, k_sc, spec.scs_hz);
            for (std::size_t k = 0; k < k_sc; ++k)
                ch(k, m, n) = resp[k];
        }
    ch.per_ue_snr_db = draw_ue_snrs(0.0, spec.jitter_db, spec.jitter_dist, spec.n_ue, rng);
    return ch;
}

} // namespace beamopt
