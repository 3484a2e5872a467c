#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blc {

enum class ErrorKind {
  InvalidArgument,
  InvalidElement,
  SingularStub,
  DegenerateNetwork,
  Validation,
  OutOfRange,
  Shape,
  Parse,
  Schema,
  UnsupportedVersion,
  TopologyMismatch,
  Config,
  Divergence,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Numerical failures (exit code 3 in the CLI) as opposed to bad user input.
constexpr bool is_numerical(ErrorKind kind) noexcept {
  return kind == ErrorKind::SingularStub || kind == ErrorKind::DegenerateNetwork ||
         kind == ErrorKind::Divergence;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace blc
