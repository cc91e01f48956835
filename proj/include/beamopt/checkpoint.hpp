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
#include "binary_io.hpp"
#include "error.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace beamopt
{

struct NamedTensor
{
    std::string name;
    ad::Tensor tensor;
};

// Named-tensor container: a free-form metadata string followed by tensors.
struct TensorContainer
{
    std::string metadata;
    std::vector<NamedTensor> tensors;
};

namespace detail
{
inline constexpr char kCheckpointMagic[8] = {'B', 'M', 'O', 'P', 'T', 'C', 'K', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 1;
} // namespace detail

// Layout (little-endian): magic[8] "BMOPTCK\0", u32 version, string metadata,
// u32 tensor count, then per tensor: string name, u8 dtype (1 = f64),
// u32 rank, u64 dims[rank], f64 payload. Strings are u32 length + bytes.
inline void save_tensors(const std::filesystem::path &path, const TensorContainer &c)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw CheckpointError("cannot open '" + path.string() + "' for writing");
    os.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
    io::write_le(os, detail::kCheckpointVersion);
    io::write_string(os, c.metadata);
    io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(c.tensors.size()));
    for (const auto &nt : c.tensors)
    {
        io::write_string(os, nt.name);
        io::write_le(os, detail::kDtypeF64);
        io::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(nt.tensor.rank()));
        for (std::size_t d : nt.tensor.shape())
            io::write_le<std::uint64_t>(os, d);
        for (double v : nt.tensor.data())
            io::write_le(os, v);
    }
    if (!os)
        throw CheckpointError("write to '" + path.string() + "' failed");
}

inline TensorContainer load_tensors(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
    auto bad = [&](const std::string &what)
    { return CheckpointError("checkpoint '" + path.string() + "': " + what); };
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0)
        throw bad("bad magic");
    std::uint32_t version = 0, count = 0;
    if (!io::read_le(is, version))
        throw bad("truncated header");
    if (version != detail::kCheckpointVersion)
        throw bad("unsupported version " + std::to_string(version));
    TensorContainer c;
    if (!io::read_string(is, c.metadata) || !io::read_le(is, count))
        throw bad("truncated header");
    for (std::uint32_t t = 0; t < count; ++t)
    {
        NamedTensor nt;
        std::uint8_t dtype = 0;
        std::uint32_t rank = 0;
        if (!io::read_string(is, nt.name, 4096) || !io::read_le(is, dtype) || !io::read_le(is, rank))
            throw bad("truncated tensor header");
        if (dtype != detail::kDtypeF64)
            throw bad("tensor '" + nt.name + "' has unsupported dtype " + std::to_string(dtype));
        if (rank > 8)
            throw bad("tensor '" + nt.name + "' has implausible rank");
        ad::Shape shape(rank);
        std::uint64_t total = 1;
        for (auto &d : shape)
        {
            std::uint64_t v = 0;
            if (!io::read_le(is, v) || v > (1ull << 32))
                throw bad("bad shape for tensor '" + nt.name + "'");
            d = static_cast<std::size_t>(v);
            total *= v;
        }
        if (total > (1ull << 30))
            throw bad("tensor '" + nt.name + "' is implausibly large");
        std::vector<double> data(static_cast<std::size_t>(total));
        for (auto &v : data)
            if (!io::read_le(is, v))
                throw bad("truncated payload for tensor '" + nt.name + "'");
        nt.tensor = ad::Tensor(std::move(shape), std::move(data));
        c.tensors.push_back(std::move(nt));
    }
    if (is.peek() != std::char_traits<char>::eof())
        throw bad("trailing bytes after last tensor");
    return c;
}

} // namespace beamopt
