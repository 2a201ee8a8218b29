#pragma once

#include <string>

namespace gde {

/// Shortest decimal representation that parses back to exactly the same
/// double. Keeps CSV artifacts byte-deterministic and readable.
std::string format_double(double value);

/// Write `contents` to `path`, throwing std::runtime_error on failure.
void write_file(const std::string& path, const std::string& contents);

/// Read a whole file, throwing std::runtime_error on failure.
std::string read_file(const std::string& path);

}  // namespace gde
