#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace untrue::text {

bool is_valid_utf8(std::string_view bytes);

/// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD so the
/// result is always usable; callers that must reject bad input check
/// is_valid_utf8 first.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view cps);
void append_utf8(std::string& out, char32_t cp);

/// Simple case folding for Latin, Greek and Cyrillic. Maps one code point to
/// one code point, so character offsets survive lowercasing.
char32_t to_lower(char32_t cp);
std::u32string to_lower(std::u32string_view cps);
std::string to_lower(std::string_view utf8);

bool is_alnum(char32_t cp);
bool is_space(char32_t cp);

std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

std::size_t codepoint_length(std::string_view utf8);

/// Substring by code point offsets [start, end).
std::string substr_codepoints(std::string_view utf8, std::size_t start, std::size_t end);

/// Truncates to at most max_chars code points, cutting at a word boundary when
/// possible and appending an ellipsis when anything was dropped.
std::string excerpt(std::string_view utf8, std::size_t max_chars);

}  // namespace untrue::text
