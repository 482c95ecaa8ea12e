#include "gnssrag/format.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace gnssrag {

std::string format_shortest(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string format_fixed(double value, int decimals) {
    // Avoid rendering "-0.00" for tiny negative values.
    std::array<char, 64> buf{};
    int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
    std::string out(buf.data(), static_cast<std::size_t>(n));
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
    return out;
}

}  // namespace gnssrag
