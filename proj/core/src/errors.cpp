#include "nes/types.hpp"

#include <sstream>

namespace nes {
namespace {

std::string describe(std::string_view what, Index expected, Index actual) {
  std::ostringstream os;
  os << what << ": expected length " << expected << ", got " << actual;
  return os.str();
}

}  // namespace

DimensionError::DimensionError(std::string_view what, Index expected,
                               Index actual)
    : std::invalid_argument(describe(what, expected, actual)),
      expected_(expected),
      actual_(actual) {}

void require_length(std::string_view name, Index actual, Index expected) {
  if (actual != expected) throw DimensionError(name, expected, actual);
}

}  // namespace nes
