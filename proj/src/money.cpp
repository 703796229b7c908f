#include "nftaudit/money.hpp"

#include <cmath>
#include <cstdio>

namespace nftaudit {

std::optional<UsdCents> usd_cents_from_double(double usd) {
    if (!std::isfinite(usd) || usd < 0.0) return std::nullopt;
    const double scaled = usd * 100.0;
    if (scaled > 9.0e15) return std::nullopt;  // beyond exact double integers
    const double rounded = std::round(scaled);
    // Tolerance covers the binary representation error of 2-decimal values;
    // genuine third decimals (>= 0.001) stay well outside it.
    if (std::fabs(scaled - rounded) > 1e-6 * std::max(1.0, std::fabs(scaled)))
        return std::nullopt;
    return static_cast<UsdCents>(rounded);
}

std::string format_usd(UsdCents cents) {
    const bool neg = cents < 0;
    const UsdCents a = neg ? -cents : cents;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", neg ? "-" : "",
                  static_cast<long long>(a / 100), static_cast<long long>(a % 100));
    return buf;
}

}  // namespace nftaudit
