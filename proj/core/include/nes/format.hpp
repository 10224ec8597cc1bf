#pragma once

#include "nes/types.hpp"

#include <string>

namespace nes {

/// Shortest text that parses back to the same double.
std::string format_real(double v);

/// Exactly 17 significant digits (printf "%.17g").
std::string format_real17(double v);

/// Comma-separated format_real of every entry.
std::string format_list(const Vector& v);

}  // namespace nes
