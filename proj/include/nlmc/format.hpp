#pragma once

#include <span>
#include <string>

namespace nlmc {

// 17 significant digits, enough to round-trip a double.
std::string format_double(double v);
std::string format_vector(std::span<const double> v);

}  // namespace nlmc
