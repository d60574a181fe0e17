#pragma once

#include <fmt/format.h>

#include <ostream>
#include <string>

namespace wavefdi::detail {

/// Shortest decimal representation that round-trips; locale independent.
inline std::string num(double x) { return fmt::format("{}", x); }

inline void put(std::ostream& os, double x) { os << num(x); }

}  // namespace wavefdi::detail
