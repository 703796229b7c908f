#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace nftaudit {

// Unix timestamp, seconds since epoch, always UTC.
using UnixSeconds = std::int64_t;

struct CivilDate {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31
};

struct YearMonth {
    int year = 0;
    int month = 0;  // 1..12

    auto operator<=>(const YearMonth&) const = default;

    YearMonth next() const {
        return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
    }
};

std::int64_t days_from_civil(int year, int month, int day);
CivilDate civil_from_days(std::int64_t days);

bool is_valid_civil(int year, int month, int day);

// Strict "YYYY-MM-DDTHH:MM:SSZ"; anything else is rejected.
std::optional<UnixSeconds> parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(UnixSeconds ts);

YearMonth year_month_of(UnixSeconds ts);

// Calendar quarter, Q1 = Jan-Mar.
inline int quarter_of_month(int month) { return (month - 1) / 3 + 1; }

}  // namespace nftaudit
