#pragma once

#include <stdexcept>
#include <string>

namespace rgnn {

// Error categories. Each maps onto one CLI exit code (see commands.hpp).

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Input data violates a documented invariant (non-finite values, a single
// class, mismatched image/label counts).
struct InvalidData : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Byte-level parse failure of an input file.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidState : std::logic_error {
  using std::logic_error::logic_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model artifact problems: unknown version tag or checksum mismatch.
struct VersionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChecksumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rgnn
