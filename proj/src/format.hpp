#pragma once

// Number and time formatting shared by the TSV/JSON writers.

#include <charconv>
#include <string>
#include <string_view>

#include "swarm/error.hpp"

namespace swarm::detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

inline std::string format_fixed(double value, int digits) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
    return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw Error(Errc::parse, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

inline long long parse_int(std::string_view text) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw Error(Errc::parse, "not an integer: '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace swarm::detail
