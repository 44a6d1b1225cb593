#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pol {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent violation. `axis` names the offending dimension.
class DimensionError : public Error {
 public:
  DimensionError(std::string op, std::string axis, const std::string& detail)
      : Error(op + ": dimension mismatch on " + axis + ": " + detail),
        op_(std::move(op)),
        axis_(std::move(axis)) {}

  const std::string& op() const noexcept { return op_; }
  const std::string& axis() const noexcept { return axis_; }

 private:
  std::string op_;
  std::string axis_;
};

// NaN/Inf where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or missing data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : DataError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pol
