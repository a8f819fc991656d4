#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rlp {

enum class ErrorKind {
  shape,
  data,
  schema,
  parse,
  format,
  numeric,
  exhaustion,
  degenerate_split,
  config,
  verification,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind selects
/// the process exit code used by the command-line tool.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorKind::schema, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(ErrorKind::parse, what + " (row " + std::to_string(row) + ")"), row_(row) {}

  [[nodiscard]] std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::format, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class ExhaustionError : public Error {
 public:
  explicit ExhaustionError(const std::string& what) : Error(ErrorKind::exhaustion, what) {}
};

class DegenerateSplitError : public Error {
 public:
  explicit DegenerateSplitError(const std::string& what) : Error(ErrorKind::degenerate_split, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Process exit status for an error kind: 1 config, 2 data, 3 numeric,
/// 4 verification.
int exit_code(ErrorKind kind) noexcept;

}  // namespace rlp
