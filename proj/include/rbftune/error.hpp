#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbftune {

enum class Errc {
  InvalidArgument,
  DuplicateNode,
  DuplicateLandmark,
  DimensionMismatch,
  LengthMismatch,
  SingularSystem,
  EmptyTestSet,
  TooManyLandmarks,
  DegenerateGeometry,
  AllEvaluationsInvalid,
  InvalidStart,
  NoValidRecords,
  Io,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rbftune
