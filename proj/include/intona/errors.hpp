#pragma once

#include <stdexcept>

namespace intona {

// Raised for malformed or unreadable user inputs (files, config values).
// The CLI maps this to exit code 1.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when well-formed inputs cannot be analyzed (no voiced frames,
// no detectable mountains, broken degree chain, ...). CLI exit code 2.
class analysis_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace intona
