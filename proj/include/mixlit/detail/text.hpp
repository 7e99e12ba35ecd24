#pragma once

#include <mixlit/detail/errors.hpp>

#include <gmpxx.h>

#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mixlit::detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// "k1=v1,k2=v2" -> map. Keys must be unique and every entry needs '='.
inline std::map<std::string, std::string> parse_kv(std::string_view text, std::string_view context) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    for (const std::string& item : split(text, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError(std::string(context) + ": expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        if (!out.emplace(key, item.substr(eq + 1)).second)
            throw ParseError(std::string(context) + ": duplicate key '" + key + "'");
    }
    return out;
}

/// Rejects keys outside `allowed`, naming the offending one.
inline void require_keys(const std::map<std::string, std::string>& kv, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
    for (const auto& [key, value] : kv) {
        bool ok = false;
        for (std::string_view a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError(std::string(context) + ": unknown key '" + key + "'");
    }
}

inline double parse_double(const std::string& s, std::string_view context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ParseError("");
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string(context) + ": not a number: '" + s + "'");
    }
}

/// Decimal or 0x-prefixed hexadecimal unsigned integer.
inline std::uint64_t parse_u64(const std::string& s, std::string_view context) {
    std::string_view v = s;
    int base = 10;
    if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
        v.remove_prefix(2);
        base = 16;
    }
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        throw ParseError(std::string(context) + ": not an unsigned integer: '" + s + "'");
    return out;
}

inline mpz_class parse_mpz(const std::string& s, std::string_view context) {
    mpz_class z;
    if (s.empty() || z.set_str(s, 10) != 0) throw ParseError(std::string(context) + ": not an integer: '" + s + "'");
    return z;
}

inline std::string_view strip_prefix(std::string_view text, std::string_view prefix) {
    return text.substr(prefix.size());
}

} // namespace mixlit::detail
