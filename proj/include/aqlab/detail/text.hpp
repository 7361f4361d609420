#pragma once

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aqlab::detail {

// Shortest representation that round-trips a double exactly (17 significant
// digits is always enough for IEEE binary64).
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(std::string_view s) {
    double out = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b != e && (*b == ' ' || *b == '\t')) ++b;
    auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc{})
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return out;
}

inline long long parse_int(std::string_view s) {
    long long out = 0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b != e && (*b == ' ' || *b == '\t')) ++b;
    auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc{} || res.ptr != e)
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

inline std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t next = s.find('\n', pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

} // namespace aqlab::detail
