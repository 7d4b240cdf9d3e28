#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flexlp {

/// Failure categories, mapped one-to-one onto CLI exit codes.
enum class ErrorKind {
  kConfig = 2,
  kData = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid numeric parameter passed to a routine (e.g. nu <= 0).
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class SingularDesignError : public Error {
 public:
  SingularDesignError(std::size_t column, const std::string& column_name)
      : Error(ErrorKind::kNumerical,
              "singular design: column " + std::to_string(column) +
                  (column_name.empty() ? std::string() : " ('" + column_name + "')") +
                  " is linearly dependent on the preceding columns"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class DecompositionError : public Error {
 public:
  explicit DecompositionError(std::size_t pivot)
      : Error(ErrorKind::kNumerical,
              "Cholesky decomposition failed: matrix not positive definite at pivot " +
                  std::to_string(pivot)),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace flexlp
