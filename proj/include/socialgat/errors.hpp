#pragma once

#include <stdexcept>
#include <string>

namespace socialgat {

// Every failure raised by the library carries a short machine-readable code
// (used verbatim by the CLI's single-line error output) plus human text.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& m) : Error("SHAPE", m) {}
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error("PARAM", m) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& m) : Error("INDEX", m) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error("NUMERIC", m) {}
};

struct CorruptTapeError : Error {
  explicit CorruptTapeError(const std::string& m) : Error("CORRUPT_TAPE", m) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error("PARSE", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("IO", m) {}
};

struct LookupError : Error {
  explicit LookupError(const std::string& m) : Error("LOOKUP", m) {}
};

struct StateError : Error {
  explicit StateError(const std::string& m) : Error("STATE", m) {}
};

struct StatisticError : Error {
  explicit StatisticError(const std::string& m) : Error("UNDEFINED_STATISTIC", m) {}
};

struct EmptyNeighborhoodError : Error {
  explicit EmptyNeighborhoodError(const std::string& m) : Error("EMPTY_NEIGHBORHOOD", m) {}
};

}  // namespace socialgat
