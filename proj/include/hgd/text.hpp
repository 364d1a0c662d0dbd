#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hgd::text {

/// True when `s` is well-formed UTF-8 (no overlongs, surrogates or values
/// above U+10FFFF).
bool is_valid_utf8(std::string_view s);

/// Number of Unicode scalar values in a valid UTF-8 string.
std::size_t scalar_count(std::string_view s);

/// Strips ASCII whitespace (space, tab, CR, LF, VT, FF) from both ends.
std::string_view trim(std::string_view s);

/// Splits on runs of ASCII whitespace; empty tokens are dropped.
std::vector<std::string_view> whitespace_tokens(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Maps ARABIC LETTER YEH (U+064A) to FARSI YEH (U+06CC) and ARABIC LETTER
/// KAF (U+0643) to KEHEH (U+06A9).
std::string normalize_arabic_yeh_kaf(std::string_view s);

/// RFC 4180 field quoting: quotes only when the field contains a comma,
/// quote, CR or LF.
std::string csv_field(std::string_view s);

}  // namespace hgd::text
