#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace layercon {

/// Fixed 17-significant-digit text for doubles; round-trips exactly.
std::string format_double(double x);
std::string join_doubles(const std::vector<double>& xs, std::string_view sep = ", ");

std::string trim(std::string_view s);
/// Whole-string numeric parsing; ConfigError on junk or overflow.
double parse_double(std::string_view s);
long parse_long(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t h);

}  // namespace layercon
