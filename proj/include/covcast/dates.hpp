#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace covcast {

using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`; throws DataError on anything else.
Date parse_date(std::string_view text);

std::string format_date(Date date);

inline long days_between(Date from, Date to) { return (to - from).count(); }

} // namespace covcast
