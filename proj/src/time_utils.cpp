#include "nftaudit/time_utils.hpp"

#include <cstdio>

namespace nftaudit {

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool is_valid_civil(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) return false;
    static const int dim[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int max_day = dim[month - 1];
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (month == 2 && leap) max_day = 29;
    return day <= max_day;
}

std::optional<UnixSeconds> parse_iso8601_utc(const std::string& text) {
    if (text.size() != 20) return std::nullopt;
    int y, mo, d, h, mi, s;
    char t, z;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d, &t, &h, &mi, &s,
                    &z) != 8)
        return std::nullopt;
    if (t != 'T' || z != 'Z') return std::nullopt;
    if (!is_valid_civil(y, mo, d)) return std::nullopt;
    if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) return std::nullopt;
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601_utc(UnixSeconds ts) {
    std::int64_t days = ts / 86400;
    std::int64_t rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const CivilDate cd = civil_from_days(days);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", cd.year, cd.month,
                  cd.day, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem % 3600) / 60), static_cast<long long>(rem % 60));
    return buf;
}

YearMonth year_month_of(UnixSeconds ts) {
    std::int64_t days = ts / 86400;
    if (ts % 86400 < 0) --days;
    const CivilDate cd = civil_from_days(days);
    return YearMonth{cd.year, cd.month};
}

}  // namespace nftaudit
