#pragma once

#include <stdexcept>
#include <string>

namespace densegrasp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateRotation : public Error { public: using Error::Error; };
class InvalidK : public Error { public: using Error::Error; };
class DimensionMismatch : public Error { public: using Error::Error; };
class MissingNormals : public Error { public: using Error::Error; };
class EmptyLabelSet : public Error { public: using Error::Error; };
class NonPositiveConfidence : public Error { public: using Error::Error; };
class TooFewPoints : public Error { public: using Error::Error; };
class EmptyView : public Error { public: using Error::Error; };
class NoStableFace : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };

/// Malformed input file. Carries the offending line (1-based, 0 if unknown)
/// and, for structured files, the field name.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::string field = {})
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& what, std::size_t line, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + what;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace densegrasp
