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

#include <stdexcept>
#include <string>
#include <string_view>

namespace hybrid {

/// Category of a failure. The CLI prints the category name as the
/// machine-parsable error class and maps it to the exit status.
enum class ErrorKind {
    parse,
    duplicate_id,
    not_found,
    mismatch,
    invalid_argument,
    io,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::parse: return "parse_error";
    case ErrorKind::duplicate_id: return "duplicate_id";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::mismatch: return "mismatch";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::io: return "io_error";
    }
    return "unknown";
}

/// Exit status used by the command line front-end for each kind.
[[nodiscard]] constexpr int exit_code(ErrorKind kind) noexcept {
    return 2 + static_cast<int>(kind);
}

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Record-level parse failure; `line` is 1-based.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

}  // namespace hybrid
