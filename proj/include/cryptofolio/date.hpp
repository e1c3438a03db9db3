#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cryptofolio {

/// Calendar date without a time zone. Crypto markets close every day, so
/// no holiday calendar is attached.
using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`. Throws std::invalid_argument on malformed input.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

}  // namespace cryptofolio
