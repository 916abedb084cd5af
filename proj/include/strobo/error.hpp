#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strobo {

enum class ErrorKind {
  DegenerateInput,
  DimensionMismatch,
  DomainError,
  NotHermitian,
  SingularLambda,
  NoInvertibleTimes,
  FrameDeficient,
  InconsistentData,
  NonConvergence,
  DataMismatch,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace strobo
