#pragma once

#include <stdexcept>

namespace fairaudit {

// Problems with input data: unreadable files, rejected rows, empty strata.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration files or flag values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fairaudit
