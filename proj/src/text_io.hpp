#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "flatcyl/types.hpp"

namespace flatcyl::detail {

// Shortest round-trip representation; parsing it back gives the same bits.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view context, std::string_view what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InvalidInput(std::string(context) + ": cannot parse " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

template <class Int = int>
Int parse_int(std::string_view s, std::string_view context, std::string_view what) {
    Int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InvalidInput(std::string(context) + ": cannot parse " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

inline std::string_view value_after(std::string_view token, std::string_view key, std::string_view context) {
    if (token.substr(0, key.size()) != key)
        throw InvalidInput(std::string(context) + ": expected header field '" + std::string(key) + "'");
    return token.substr(key.size());
}

}  // namespace flatcyl::detail
