#pragma once

#include <stdexcept>
#include <string>

namespace imb {

/// Bad arguments, broken preconditions, malformed configs. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File-level failures: missing files, bad magic, truncation, checksums.
/// CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  enum class Kind {
    open_failed,
    bad_magic,
    truncated,
    count_mismatch,
    version_mismatch,
    checksum_mismatch,
    malformed,
  };

  IoError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace imb
