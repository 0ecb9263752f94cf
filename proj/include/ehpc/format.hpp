#pragma once

#include <string>

namespace ehpc {

/// Shortest decimal string that round-trips to exactly `v` under strtod.
/// Keeps CSV output bit-stable without precision loss.
std::string format_double(double v);

/// Inverse of format_double; throws std::invalid_argument on trailing junk.
double parse_double(const std::string& s);

}  // namespace ehpc
