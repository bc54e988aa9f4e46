#pragma once

#include <cstdio>
#include <string>

namespace cmte {

/// Shortest-round-trip-ish rendering used in every delimited output file.
/// Fixed format so reruns produce byte-identical files.
inline std::string format_number(double x, int digits = 12) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

}  // namespace cmte
