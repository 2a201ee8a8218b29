#include "gde/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gde {

std::string format_double(double value) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        int n = std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        double parsed = 0.0;
        auto first = buf, last = buf + n;
        if (*first == '+') ++first;
        std::from_chars(first, last, parsed);
        if (parsed == value) return std::string(buf, n);
    }
    return std::string(buf);
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw std::runtime_error("read failed: " + path);
    return ss.str();
}

}  // namespace gde
