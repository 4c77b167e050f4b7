#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace motionid::text {

// Shortest decimal form that parses back to the same double.
std::string format_exact(double value);
// Fixed 17 significant digits, the feature-file convention.
std::string format_17(double value);

double parse_double(std::string_view token);
std::int64_t parse_int(std::string_view token);
std::uint64_t parse_uint(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view text);

}  // namespace motionid::text
