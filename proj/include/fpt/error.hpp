#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fpt {

enum class Errc {
  kMissingValue,
  kSpaceMismatch,
  kMalformedDistribution,
  kNotTerminating,
  kBadTimestep,
  kNotDirac,
  kIncomparable,
  kNotConsistent,
  kNotAPath,
  kUnknownState,
  kSyntaxError,
  kUnknownFunction,
  kBudgetExceeded,
  kNotAdapted,
  kNotFound,
  kResourceLimit,
  kInvalidArgument,
  kInvalidFile,
};

std::string_view errc_name(Errc code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  [[nodiscard]] Errc code() const { return code_; }

 private:
  Errc code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message);

  // Byte offset into the parsed text.
  [[nodiscard]] std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace fpt
