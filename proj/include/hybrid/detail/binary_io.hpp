// Copyright 2026 The Hybrid Retrieval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian fixed-width encoding shared by the on-disk index formats.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>

#include "hybrid/error.hpp"

namespace hybrid::detail {

template <typename UInt>
void write_le(std::ostream& out, UInt value) {
    std::array<char, sizeof(UInt)> bytes{};
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename UInt>
[[nodiscard]] UInt read_le(std::istream& in, std::string_view what) {
    std::array<unsigned char, sizeof(UInt)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) {
        throw Error(ErrorKind::io, "unexpected end of data while reading " + std::string(what));
    }
    UInt value = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
        value |= static_cast<UInt>(bytes[i]) << (8 * i);
    }
    return value;
}

inline void write_u8(std::ostream& out, std::uint8_t v) { write_le<std::uint8_t>(out, v); }
inline void write_u32(std::ostream& out, std::uint32_t v) { write_le<std::uint32_t>(out, v); }
inline void write_u64(std::ostream& out, std::uint64_t v) { write_le<std::uint64_t>(out, v); }

inline void write_f32(std::ostream& out, float v) {
    static_assert(std::numeric_limits<float>::is_iec559);
    write_u32(out, std::bit_cast<std::uint32_t>(v));
}

[[nodiscard]] inline float read_f32(std::istream& in, std::string_view what) {
    return std::bit_cast<float>(read_le<std::uint32_t>(in, what));
}

/// u32 byte length followed by the raw UTF-8 bytes.
inline void write_string(std::ostream& out, std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::invalid_argument, "string too long to serialize");
    }
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

[[nodiscard]] inline std::string read_string(std::istream& in, std::string_view what) {
    const auto len = read_le<std::uint32_t>(in, what);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) {
        throw Error(ErrorKind::io, "unexpected end of data while reading " + std::string(what));
    }
    return s;
}

}  // namespace hybrid::detail
