#pragma once

#include <string>
#include <string_view>

namespace yieldsim {

// Shortest decimal text that round-trips the exact double value.
std::string format_double(double v);

// Strict parsers: the whole token must be consumed.
// On failure they throw parse_error with `context` in the message.
double parse_double(std::string_view token, std::string_view context);
long long parse_int(std::string_view token, std::string_view context);

}  // namespace yieldsim
