#pragma once

#include <cstdio>
#include <string>

namespace dlnlab {

// Shortest round-trippable decimal form; every CSV/JSON writer goes through
// this so repeated runs emit byte-identical files.
inline std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

}  // namespace dlnlab
