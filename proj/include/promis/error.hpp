#pragma once

#include <stdexcept>
#include <string>

namespace promis {

/// Coarse classification used by the command line front end to pick an exit code.
enum class ErrorKind {
  Parse,             // malformed input bytes (JSON, PGM, program text)
  InvalidCoordinate,
  UnsupportedGeometry,
  Resolution,        // dangling references inside an input file
  RelationUndefined,
  Grounding,
  Cycle,
  Capacity,
  InvalidArgument,
  Configuration,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// 2 for usage/configuration problems, 1 for data problems.
  int exit_code() const noexcept {
    return (kind_ == ErrorKind::InvalidArgument || kind_ == ErrorKind::Configuration) ? 2 : 1;
  }

 private:
  ErrorKind kind_;
};

/// Located syntax error; `offset` is a byte offset for JSON and a 1-based line/column for text.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0,
             std::size_t offset = 0)
      : Error(ErrorKind::Parse, what), line_(line), column_(column), offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::size_t offset_;
};

}  // namespace promis
