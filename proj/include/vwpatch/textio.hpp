#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vwpatch/errors.hpp"
#include "vwpatch/geometry.hpp"

namespace vwp {

// Locale-free numeric text. Doubles are written with 17 significant
// digits so that every value round-trips bit-exactly.

inline std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(long v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }
inline std::string fmt(Vec2 v) { return fmt(v.x) + " " + fmt(v.y); }

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{})
        throw ValidationError("cannot parse number: '" + std::string(s) + "'");
    for (const char* q = res.ptr; q != last; ++q)
        if (*q != ' ' && *q != '\t')
            throw ValidationError("trailing characters after number: '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{})
        throw ValidationError("cannot parse integer: '" + std::string(s) + "'");
    for (const char* q = res.ptr; q != last; ++q)
        if (*q != ' ' && *q != '\t')
            throw ValidationError("trailing characters after integer: '" + std::string(s) + "'");
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::vector<double> parse_double_list(std::string_view s) {
    std::vector<double> out;
    for (const std::string& tok : split_ws(s)) out.push_back(parse_double(tok));
    return out;
}

// points separated by ';', coordinates by whitespace: "0.3 0 ; -0.3 0"
inline std::vector<Vec2> parse_point_list(std::string_view s) {
    std::vector<Vec2> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t semi = s.find(';', start);
        const std::string_view part =
            trim(s.substr(start, semi == std::string_view::npos ? semi : semi - start));
        if (!part.empty()) {
            const auto c = parse_double_list(part);
            if (c.size() != 2) throw ValidationError("point needs exactly two coordinates");
            out.push_back({c[0], c[1]});
        }
        if (semi == std::string_view::npos) break;
        start = semi + 1;
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << content;
    if (!out) throw ValidationError("write failed: " + path);
}

// FNV-1a 64-bit, used for bundle manifests
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[v & 0xf];
        v >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf, 16);
}

} // namespace vwp
