#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace segsafe {

// Proleptic Gregorian calendar date.
struct Date {
    int year = 0;
    int month = 0;  // 1..12
    int day = 0;    // 1..31

    auto operator<=>(const Date&) const = default;
};

bool date_valid(const Date& d);

// Strict "YYYY-MM-DD"; rejects trailing junk and impossible dates.
std::optional<Date> parse_date(const std::string& s);

std::string format_date(const Date& d);

// Days since 1970-01-01 (negative before). Assumes a valid date.
std::int64_t days_from_civil(const Date& d);

Date civil_from_days(std::int64_t z);

}  // namespace segsafe
