#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace hardthresh {

// Shortest decimal text that parses back to exactly `value`. Non-finite
// values print as "nan" / "inf" / "-inf".
inline std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

}  // namespace hardthresh
