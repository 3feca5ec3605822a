// Command-line front end: couples, train, predict, evaluate, plot-data, model-show.
#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace quakefis::cli {

inline constexpr double kDaysPerMonth = 30.44;

/// "190mi", "305.8km" or a bare number of kilometers.
double parse_distance_km(std::string_view text);

/// "91.3d", "3mo" (30.44 days each) or a bare number of days.
double parse_duration_days(std::string_view text);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or data.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quakefis::cli
