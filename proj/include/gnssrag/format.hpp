#pragma once

#include <string>

namespace gnssrag {

/// Shortest decimal text that parses back to the same double ("2", "0.1", "-10").
std::string format_shortest(double value);
/// Fixed-point text with the given number of decimals ("1.0000").
std::string format_fixed(double value, int decimals);

}  // namespace gnssrag
