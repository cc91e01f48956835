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

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

namespace beamopt::io
{

// Little-endian scalar I/O. Reads report failure through the stream state.
template <typename T>
    requires std::is_arithmetic_v<T>
void write_le(std::ostream &os, T value)
{
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T>
    requires std::is_arithmetic_v<T>
bool read_le(std::istream &is, T &value)
{
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char *>(buf), sizeof(T)))
        return false;
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
            std::swap(buf[i], buf[sizeof(T) - 1 - i]);
    std::memcpy(&value, buf, sizeof(T));
    return true;
}

inline void write_string(std::ostream &os, const std::string &s)
{
    write_le<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline bool read_string(std::istream &is, std::string &s, std::uint32_t max_len = 1u << 24)
{
    std::uint32_t len = 0;
    if (!read_le(is, len) || len > max_len)
        return false;
    s.resize(len);
    return static_cast<bool>(is.read(s.data(), len));
}

// FNV-1a, 64 bit.
class Fnv1a
{
public:
    void bytes(const void *data, std::size_t n)
    {
        const auto *p = static_cast<const unsigned char *>(data);
        for (std::size_t i = 0; i < n; ++i)
        {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    template <typename T>
        requires std::is_arithmetic_v<T>
    void value(T v)
    {
        unsigned char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big)
            for (std::size_t i = 0; i < sizeof(T) / 2; ++i)
                std::swap(buf[i], buf[sizeof(T) - 1 - i]);
        bytes(buf, sizeof(T));
    }
    std::uint64_t digest() const noexcept { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

} // namespace beamopt::io
