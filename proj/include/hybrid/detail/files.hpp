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

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <system_error>

#include "hybrid/error.hpp"

namespace hybrid::detail {

namespace fs = std::filesystem;

[[nodiscard]] inline std::ifstream open_input(const fs::path& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open " + path.string() + " for reading");
    }
    return in;
}

[[nodiscard]] inline std::string read_file(const fs::path& path) {
    auto in = open_input(path, true);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Writes through `fill` into a sibling temporary file, then renames it over
/// `path`. Readers see either the old file or the complete new one.
inline void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& fill,
                              bool binary = false) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
        }
        fill(out);
        out.flush();
        if (!out) {
            throw Error(ErrorKind::io, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error(ErrorKind::io, "cannot rename " + tmp.string() + ": " + ec.message());
    }
}

/// Builds a directory under a temporary name and swaps it into place.
inline void replace_directory_atomic(const fs::path& dir, const std::function<void(const fs::path&)>& fill) {
    fs::path tmp = dir;
    tmp += ".tmp";
    fs::path old = dir;
    old += ".old";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    try {
        fill(tmp);
    } catch (...) {
        fs::remove_all(tmp);
        throw;
    }
    std::error_code ec;
    fs::remove_all(old);
    if (fs::exists(dir)) {
        fs::rename(dir, old, ec);
        if (ec) {
            throw Error(ErrorKind::io, "cannot move aside " + dir.string() + ": " + ec.message());
        }
    }
    fs::rename(tmp, dir, ec);
    if (ec) {
        throw Error(ErrorKind::io, "cannot install " + dir.string() + ": " + ec.message());
    }
    fs::remove_all(old);
}

}  // namespace hybrid::detail
