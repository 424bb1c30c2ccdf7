#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace moa {

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s);

/// Lowercased maximal runs of ASCII alphanumerics. Bytes >= 0x80 count as
/// word characters so UTF-8 words stay intact.
std::vector<std::string> tokenize(std::string_view text);

/// Byte offsets of every UTF-8 code point start, plus text.size() at the end.
std::vector<std::size_t> utf8_boundaries(std::string_view text);

/// Longest prefix of at most `max_bytes` bytes that does not split a code point.
std::string_view utf8_prefix(std::string_view text, std::size_t max_bytes);

/// Replaces typographic apostrophes (U+2018, U+2019) with ASCII '.
std::string normalize_apostrophes(std::string_view s);

/// Collapses every run of whitespace (including newlines) into one space.
std::string flatten_whitespace(std::string_view s);

std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

}  // namespace moa
