#include "nes/format.hpp"

#include <charconv>
#include <cstdio>

namespace nes {

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_real17(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_list(const Vector& v) {
  std::string out;
  for (Index k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += format_real(v(k));
  }
  return out;
}

}  // namespace nes
