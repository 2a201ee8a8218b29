#pragma once

#include <charconv>
#include <string_view>
#include <vector>

#include "gde/errors.hpp"

namespace gde::detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline std::vector<std::string_view> split_char(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// Locale-independent double parse of a whole token. `line_no` and the
/// token's 1-based column feed the error message.
inline double parse_double(std::string_view token, int line_no, int column) {
    // from_chars does not accept leading whitespace or '+'.
    size_t b = 0, e = token.size();
    while (b < e && is_space(token[b])) ++b;
    while (e > b && is_space(token[e - 1])) --e;
    std::string_view t = token.substr(b, e - b);
    bool plus = !t.empty() && t.front() == '+';
    if (plus) t.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ParseError("MalformedFloat", line_no, column, std::string(token));
    }
    return value;
}

}  // namespace gde::detail
