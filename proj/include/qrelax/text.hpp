#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qrelax::text {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

/// Display form for metrics: 12 significant digits, enough for every pinned
/// tolerance, without surfacing grid arithmetic residue.
std::string format_metric(double value);

std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char separator);
std::string_view trim(std::string_view token);

}  // namespace qrelax::text
