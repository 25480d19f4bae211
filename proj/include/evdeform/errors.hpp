#pragma once

#include <stdexcept>
#include <string>

namespace evdeform {

// Input files or streams that violate the data contract (bad records, out-of-bounds pixels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A processing stage could not produce a result (e.g. no markers to seed).
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace evdeform
