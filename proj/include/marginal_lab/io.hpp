#pragma once

#include <cstdio>
#include <string>

namespace marginal_lab {

// Shortest-round-trip float formatting used for every CSV/text artifact:
// 17 significant digits reproduce the double bit pattern exactly.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace marginal_lab
