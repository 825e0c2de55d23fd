#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hca {

/// printf("%.9g").
std::string format_number(double v);

/// Joins fields with commas and appends a newline.
std::string csv_row(const std::vector<std::string>& fields);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> parse_csv_row(std::string_view line);

}  // namespace hca
