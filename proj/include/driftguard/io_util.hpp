// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace driftguard {

/// Write contents to path via a temp file in the same directory plus an
/// atomic rename, so failures never leave partial output behind.
void atomic_write_file(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Call fn(line_number, line) for every line of a text file; line
/// numbers start at 1. Blank lines are passed through (callers decide).
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const std::string&)>& fn);

/// Current UTC time as an RFC 3339 timestamp (second resolution).
std::string rfc3339_now();

/// Light structural check: YYYY-MM-DDThh:mm:ss with optional fraction
/// and Z or +-hh:mm offset.
bool looks_like_rfc3339(std::string_view text);

}  // namespace driftguard
