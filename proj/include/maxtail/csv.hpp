#pragma once

#include <cstdio>
#include <string>

namespace maxtail::csv {

// Shortest round-trip decimal form, stable across runs.
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

// RFC 4180 quoting, applied only when the field needs it (the copula
// parameter field contains commas).
inline std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

} // namespace maxtail::csv
