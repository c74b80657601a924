#pragma once

#include <string>

namespace fairaudit {

// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

}  // namespace fairaudit
