#pragma once

#include <cstdio>
#include <string>

namespace sbsvie::io {

// 17 significant digits; round-trips a double exactly.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace sbsvie::io
