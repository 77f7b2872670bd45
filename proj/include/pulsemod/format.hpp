#pragma once

#include <charconv>
#include <iomanip>
#include <sstream>
#include <string>
#include <system_error>

namespace pulsemod {

/// Shortest round-trip decimal representation.
[[nodiscard]] inline std::string format_full(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return res.ec == std::errc{} ? std::string(buf, res.ptr) : std::string("nan");
}

/// Six significant digits, for terminal output.
[[nodiscard]] inline std::string format_human(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace pulsemod
