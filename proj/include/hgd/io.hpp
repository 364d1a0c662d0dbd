#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace hgd::io {

/// Shortest decimal string that parses back to exactly `v`. Negative zero is
/// written as "-0.0" so JSON readers keep the sign. `v` must be finite.
std::string format_double(double v);

/// Appends `[a,b,...]` using format_double.
void append_double_array(std::string& out, std::span<const double> values);

/// JSON string literal (quotes included); UTF-8 passes through unescaped.
std::string json_string(std::string_view s);

/// Writes `contents` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written file.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

/// Whole-file read; throws hgd::Error naming the path when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace hgd::io
