#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chartnl {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
/// Splits on `sep`; empty pieces are kept.
std::vector<std::string_view> split(std::string_view s, char sep);
std::string to_lower_ascii(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
/// Case-insensitive (ASCII) substring search; npos when absent.
std::size_t find_icase(std::string_view haystack, std::string_view needle, std::size_t from = 0);
bool is_word_char(unsigned char c);
/// Lowercase hex encoding.
std::string to_hex(const unsigned char* data, std::size_t n);

}  // namespace chartnl

namespace chartnl {

/// Renders rows as space-padded columns; the first row is the header and is
/// followed by a dashed rule.
std::string aligned_table(const std::vector<std::vector<std::string>>& rows);

/// Fixed-point decimal text.
std::string fixed(double v, int precision);

}  // namespace chartnl
