#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace pragma {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PRAGMA_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// Probability algebra.
PRAGMA_DEFINE_ERROR(AllZeroSupport);
PRAGMA_DEFINE_ERROR(NormalizationError);

// Models.
PRAGMA_DEFINE_ERROR(UnknownToken);
PRAGMA_DEFINE_ERROR(MissingEntry);
PRAGMA_DEFINE_ERROR(EnumerationTooLarge);
PRAGMA_DEFINE_ERROR(InvalidInput);

// Evaluation.
PRAGMA_DEFINE_ERROR(LengthMismatch);
PRAGMA_DEFINE_ERROR(EmptyCorpus);
PRAGMA_DEFINE_ERROR(SameBackTranslator);

// Remote scoring.
PRAGMA_DEFINE_ERROR(HandshakeFailed);
PRAGMA_DEFINE_ERROR(Timeout);
PRAGMA_DEFINE_ERROR(ProtocolError);
PRAGMA_DEFINE_ERROR(TransportError);

// Command line.
PRAGMA_DEFINE_ERROR(UsageError);
PRAGMA_DEFINE_ERROR(MissingDistractors);
PRAGMA_DEFINE_ERROR(MissingBackwardModel);

#undef PRAGMA_DEFINE_ERROR

/// Raised while reading a text file; carries the 1-based line number.
/// With an origin the message reads "origin:line: detail".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, const std::string& origin = "")
      : Error((origin.empty() ? "line " : origin + ":") + std::to_string(line) + ": " + message),
        detail_(message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t line_;
};

/// Error reported by a remote scorer, either for a whole request or for a
/// single batch item.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace pragma
