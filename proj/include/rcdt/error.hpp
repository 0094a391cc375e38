#pragma once

#include <stdexcept>
#include <string>

namespace rcdt {

enum class ErrorKind {
  InvalidInput,
  ConfigMismatch,
  InsufficientData,
  ModelIncomplete,
  FormatError,
  GenerationFailed,
};

const char* to_string(ErrorKind kind);

// All library failures are reported through this one exception type; callers
// that need to branch on the cause inspect kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rcdt
