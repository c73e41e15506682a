#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poromix {

enum class ErrorCode {
  NonPSD,
  InvalidExtent,
  EmptyEssentialBoundary,
  UnsupportedDegree,
  OutOfElement,
  DegenerateCell,
  SingularLocalMass,
  AssemblyOverflow,
  NonFiniteEntry,
  SingularSystem,
  SolveFailure,
  UnknownScenario,
  DegenerateRatio,
  IoError,
  ParseError,
  UnknownKey,
  InvalidValue,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace poromix
