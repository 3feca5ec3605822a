// Locale-independent text helpers shared by the CSV readers and writers.
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace quakefis {

using Timestamp = std::chrono::sys_seconds;

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

/// Whole-field parse; nullopt on trailing garbage, empty input or non-finite values.
std::optional<double> parse_double(std::string_view text);

/// Splits one CSV line on commas. Quoting is not supported; a trailing CR is dropped.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(Timestamp t);

/// Accepts `YYYY-MM-DDTHH:MM:SSZ`, `YYYY-MM-DDTHH:MM:SS` (taken as UTC) and
/// `YYYY-MM-DD` (midnight UTC). Calendar fields are range-checked.
std::optional<Timestamp> parse_iso8601(std::string_view text);

inline constexpr double kSecondsPerDay = 86400.0;

inline double days_between(Timestamp from, Timestamp to) {
    return static_cast<double>((to - from).count()) / kSecondsPerDay;
}

}  // namespace quakefis
