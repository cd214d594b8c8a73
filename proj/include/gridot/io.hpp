#pragma once

#include <string>

namespace gridot {

/// Decimal text with 17 significant digits; round-trips every double.
std::string format_double(double value);

}  // namespace gridot
