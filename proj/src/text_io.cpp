#include "yieldsim/text_io.hpp"

#include <charconv>
#include <system_error>

#include "yieldsim/errors.hpp"

namespace yieldsim {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, std::string_view context) {
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw parse_error("bad number '" + std::string(token) + "' in " + std::string(context));
    }
    return v;
}

long long parse_int(std::string_view token, std::string_view context) {
    long long v = 0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw parse_error("bad integer '" + std::string(token) + "' in " + std::string(context));
    }
    return v;
}

}  // namespace yieldsim
