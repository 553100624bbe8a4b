#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace agl {

/// Splits one comma-separated line. No quoting: none of the files written
/// by this project contain commas inside fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Splits on `sep` and trims surrounding whitespace from each piece; empty
/// pieces are dropped.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

std::string trim(std::string_view text);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Strict decimal parse of the whole field; throws InputError.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

}  // namespace agl
