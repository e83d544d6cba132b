#pragma once

#include <stdexcept>
#include <string>

namespace genforest {

// Malformed or inconsistent input data (CSV, masks, out-of-domain values).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model file or model/dataset mismatch.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A combinatorial guard was exceeded (e.g. partition enumeration cap).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace genforest
