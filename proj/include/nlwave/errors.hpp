#pragma once

#include <stdexcept>
#include <string>

namespace nlwave {

/// Base of every error raised by the library. `kind()` is the stable name
/// written into manifests and CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), message_(what) {}
  const std::string& kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string kind_;
  std::string message_;
};

#define NLWAVE_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  };

NLWAVE_DEFINE_ERROR(DomainError)
NLWAVE_DEFINE_ERROR(QuadratureDivergence)
NLWAVE_DEFINE_ERROR(GridMismatch)
NLWAVE_DEFINE_ERROR(SearchFailure)
NLWAVE_DEFINE_ERROR(NoRoot)
NLWAVE_DEFINE_ERROR(ParamError)
NLWAVE_DEFINE_ERROR(NoConvergence)
NLWAVE_DEFINE_ERROR(CollapseToEquilibrium)
NLWAVE_DEFINE_ERROR(BlowUp)
NLWAVE_DEFINE_ERROR(DomainTooSmall)
NLWAVE_DEFINE_ERROR(DegenerateInput)
NLWAVE_DEFINE_ERROR(InsufficientHistory)
NLWAVE_DEFINE_ERROR(Overflow)
NLWAVE_DEFINE_ERROR(ParseError)
NLWAVE_DEFINE_ERROR(ValidationError)
NLWAVE_DEFINE_ERROR(IoError)

#undef NLWAVE_DEFINE_ERROR

}  // namespace nlwave
