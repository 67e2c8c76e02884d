#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace treepoly {

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Strict: the whole (trimmed) field must be a number. Throws ConfigError.
double parse_double(std::string_view field);
long long parse_integer(std::string_view field);

/// `%.17g`: round-trips every finite double.
std::string format_double(double value);

}  // namespace treepoly
