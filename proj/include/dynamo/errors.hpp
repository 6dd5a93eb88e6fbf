// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace dynamo {

// Invalid or inconsistent input data (parse failures, violated invariants,
// shape mismatches discovered while validating user-supplied material).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dynamo
