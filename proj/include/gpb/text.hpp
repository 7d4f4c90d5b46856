#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gpb {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Throws InvalidArgument on malformed or trailing text.
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

}  // namespace gpb
