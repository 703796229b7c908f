#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace nftaudit {

// USD amounts are kept as integer cents so that report arithmetic is exact
// to 2 decimal places.
using UsdCents = std::int64_t;

// Accepts values with at most 2 fractional digits; rejects anything that is
// not a clean cent amount (e.g. 1.239) or is negative.
std::optional<UsdCents> usd_cents_from_double(double usd);

std::string format_usd(UsdCents cents);

inline double usd_to_double(UsdCents cents) { return static_cast<double>(cents) / 100.0; }

}  // namespace nftaudit
