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

#include "binary_io.hpp"
#include "channel.hpp"
#include "parallel.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace beamopt
{

// A set of channel samples sharing (M, N, K).
struct ChannelDataset
{
    ChannelSpec spec;
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;
    std::vector<ChannelMatrix> samples;

    std::size_t size() const noexcept { return samples.size(); }
};

// Hash of everything that determines the dataset contents.
inline std::uint64_t dataset_fingerprint(const ChannelSpec &spec, std::uint64_t seed, std::uint64_t count)
{
    io::Fnv1a h;
    h.value<std::uint32_t>(static_cast<std::uint32_t>(spec.profile.id()));
    for (const auto &t : spec.profile.taps())
    {
        h.value(t.normalized_delay);
        h.value(t.power_db);
    }
    h.value(spec.delay_spread_ns);
    h.value<std::uint64_t>(spec.m_tx);
    h.value<std::uint64_t>(spec.n_ue);
    h.value<std::uint64_t>(spec.num_rb);
    h.value<std::uint64_t>(spec.k_sc());
    h.value(spec.scs_hz);
    h.value(spec.doppler_hz);
    h.value(spec.jitter_db);
    h.value<std::uint32_t>(static_cast<std::uint32_t>(spec.jitter_dist));
    h.value(seed);
    h.value(count);
    return h.digest();
}

// Sample i is drawn from sub-stream derive_seed(seed, i), so the result does
// not depend on the thread count.
inline ChannelDataset generate_dataset(const ChannelSpec &spec, std::size_t count, std::uint64_t seed,
                                       std::size_t threads = 1)
{
    if (count == 0)
        throw EmptyDataset("dataset sample count must be positive");
    spec.validate();
    ChannelDataset ds{spec, seed, dataset_fingerprint(spec, seed, count), {}};
    ds.samples.resize(count);
    parallel_for(count, threads, [&](std::size_t i)
                 {
        Rng rng = make_rng(seed, i);
        ds.samples[i] = gen_channel(spec, rng); });
    return ds;
}

namespace detail
{
inline constexpr char kDatasetMagic[8] = {'B', 'M', 'O', 'P', 'T', 'D', 'S', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;
} // namespace detail

// Layout (all little-endian):
//   magic[8] "BMOPTDS\0", u32 version,
//   u64 M, u64 N, u64 K, u64 count, u64 seed, u32 profile id, f64 delay spread ns,
//   u64 num_rb (K may differ when set explicitly), f64 scs_hz, f64 doppler_hz, f64 jitter_db, u32 jitter dist,
//   u32 tap count, (f64 normalized delay, f64 power dB) per tap, u64 fingerprint,
//   then per sample: K*M*N interleaved (re, im) f64, N f64 per-UE SNR offsets.
inline void save_dataset(const ChannelDataset &ds, const std::filesystem::path &path)
{
    if (ds.samples.empty())
        throw EmptyDataset("refusing to save an empty dataset");
    const auto &s = ds.spec;
    for (const auto &x : ds.samples)
    {
        if (x.m_tx != s.m_tx || x.n_ue != s.n_ue || x.k_sc != s.k_sc())
            throw ShapeInconsistency("save_dataset: sample shape differs from the dataset spec");
        x.validate();
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw DatasetError("cannot open '" + path.string() + "' for writing");
    os.write(detail::kDatasetMagic, sizeof(detail::kDatasetMagic));
    io::write_le(os, detail::kDatasetVersion);
    io::write_le<std::uint64_t>(os, s.m_tx);
    io::write_le<std::uint64_t>(os, s.n_ue);
    io::write_le<std::uint64_t>(os, s.k_sc());
    io::write_le<std::uint64_t>(os, ds.samples.size());
    io::write_le<std::uint64_t>(os, ds.seed);
    io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.profile.id()));
    io::write_le(os, s.delay_spread_ns);
    io::write_le<std::uint64_t>(os, s.num_rb);
    io::write_le(os, s.scs_hz);
    io::write_le(os, s.doppler_hz);
    io::write_le(os, s.jitter_db);
    io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.jitter_dist));
    io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.profile.taps().size()));
    for (const auto &t : s.profile.taps())
    {
        io::write_le(os, t.normalized_delay);
        io::write_le(os, t.power_db);
    }
    io::write_le(os, dataset_fingerprint(s, ds.seed, ds.samples.size()));
    for (const auto &x : ds.samples)
    {
        for (const auto &z : x.h)
        {
            io::write_le(os, z.real());
            io::write_le(os, z.imag());
        }
        for (double v : x.per_ue_snr_db)
            io::write_le(os, v);
    }
    if (!os)
        throw DatasetError("write to '" + path.string() + "' failed");
}

inline ChannelDataset load_dataset(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw DatasetError("cannot open dataset '" + path.string() + "'");
    auto corrupt = [&](const std::string &what)
    { return CorruptDataset("dataset '" + path.string() + "': " + what); };

    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kDatasetMagic, sizeof(magic)) != 0)
        throw corrupt("bad magic");
    std::uint32_t version = 0;
    if (!io::read_le(is, version))
        throw corrupt("truncated header");
    if (version != detail::kDatasetVersion)
        throw VersionMismatch("dataset '" + path.string() + "': version " + std::to_string(version) +
                              ", expected " + std::to_string(detail::kDatasetVersion));

    std::uint64_t m = 0, n = 0, k = 0, count = 0, seed = 0, num_rb = 0, fingerprint = 0;
    std::uint32_t profile_id = 0, jitter_dist = 0, tap_count = 0;
    double delay_spread = 0, scs = 0, doppler = 0, jitter = 0;
    bool ok = io::read_le(is, m) && io::read_le(is, n) && io::read_le(is, k) && io::read_le(is, count) &&
              io::read_le(is, seed) && io::read_le(is, profile_id) && io::read_le(is, delay_spread) &&
              io::read_le(is, num_rb) && io::read_le(is, scs) && io::read_le(is, doppler) &&
              io::read_le(is, jitter) && io::read_le(is, jitter_dist) && io::read_le(is, tap_count);
    if (!ok)
        throw corrupt("truncated header");
    if (tap_count == 0 || tap_count > 4096)
        throw corrupt("implausible tap count " + std::to_string(tap_count));
    std::vector<Tap> taps(tap_count);
    for (auto &t : taps)
        if (!io::read_le(is, t.normalized_delay) || !io::read_le(is, t.power_db))
            throw corrupt("truncated tap table");
    if (!io::read_le(is, fingerprint))
        throw corrupt("truncated header");

    if (m == 0 || n == 0 || count == 0 || k == 0 || k > (1u << 20))
        throw ShapeInconsistency("dataset '" + path.string() + "': inconsistent shape header (M=" +
                                 std::to_string(m) + ", N=" + std::to_string(n) + ", K=" + std::to_string(k) +
                                 ", RBs=" + std::to_string(num_rb) + ", count=" + std::to_string(count) + ")");
    if (profile_id != 0 && profile_id != 1 && profile_id != 3)
        throw corrupt("unknown profile id " + std::to_string(profile_id));
    if (jitter_dist != 0)
        throw corrupt("unknown jitter distribution");

    ChannelDataset ds;
    try
    {
        ds.spec.profile = TdlProfile(static_cast<ProfileId>(profile_id), taps);
    }
    catch (const ConfigError &e)
    {
        throw corrupt(e.what());
    }
    ds.spec.delay_spread_ns = delay_spread;
    ds.spec.m_tx = m;
    ds.spec.n_ue = n;
    ds.spec.num_rb = num_rb;
    ds.spec.subcarriers = (k == 12 * num_rb) ? 0 : k;
    ds.spec.scs_hz = scs;
    ds.spec.doppler_hz = doppler;
    ds.spec.jitter_db = jitter;
    ds.seed = seed;
    ds.fingerprint = fingerprint;

    // Payload size is fixed by the header; check it before allocating.
    const std::uint64_t per_sample = (k * m * n * 2 + n) * sizeof(double);
    const auto header_end = is.tellg();
    is.seekg(0, std::ios::end);
    const auto file_end = is.tellg();
    is.seekg(header_end);
    const auto remaining = static_cast<std::uint64_t>(file_end - header_end);
    if (count > remaining / per_sample || remaining < count * per_sample)
        throw corrupt("truncated payload");
    if (remaining != count * per_sample)
        throw ShapeInconsistency("dataset '" + path.string() + "': payload length does not match header shape");

    ds.samples.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
    {
        ChannelMatrix x(m, n, k);
        for (auto &z : x.h)
        {
            double re = 0, im = 0;
            if (!io::read_le(is, re) || !io::read_le(is, im))
                throw corrupt("truncated payload");
            z = cdouble(re, im);
        }
        for (auto &v : x.per_ue_snr_db)
            if (!io::read_le(is, v))
                throw corrupt("truncated payload");
        if (!detail::all_finite(x.h))
            throw corrupt("non-finite channel entry in sample " + std::to_string(i));
        ds.samples.push_back(std::move(x));
    }
    if (dataset_fingerprint(ds.spec, seed, count) != fingerprint)
        throw corrupt("fingerprint does not match header contents");
    return ds;
}

} // namespace beamopt
