#pragma once

#include <cstdio>
#include <string>

namespace qmcnets {

/// Shortest %.17g rendering; round-trips IEEE doubles exactly, which keeps
/// report and CSV output byte-stable across runs.
inline std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace qmcnets
