#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace astseq {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

/// Grammar outside the supported subset. Raised instead of silently
/// producing a lossy tree.
class UnsupportedConstruct : public Error {
 public:
  explicit UnsupportedConstruct(const std::string& construct)
      : Error("unsupported construct: " + construct), construct_(construct) {}
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

class MalformedTree : public Error {
 public:
  using Error::Error;
};

class MalformedSerialization : public Error {
 public:
  MalformedSerialization(std::size_t position, const std::string& message)
      : Error("malformed serialization at offset " + std::to_string(position) +
              ": " + message),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t frames, std::size_t accessories)
      : Error("layout frame length " + std::to_string(frames) +
              " must equal accessory length " + std::to_string(accessories) +
              " + 1") {}
};

class PoolExhausted : public Error {
 public:
  PoolExhausted(const std::string& category, std::size_t size)
      : Error("name pool '" + category + "' exhausted (" +
              std::to_string(size) + " candidates)"),
        category_(category) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

class DuplicateEntry : public Error {
 public:
  explicit DuplicateEntry(const std::string& entry)
      : Error("duplicate vocabulary entry: " + entry) {}
};

class UnknownId : public Error {
 public:
  explicit UnknownId(long long id)
      : Error("unknown token id " + std::to_string(id)) {}
  UnknownId(long long id, const std::string& why)
      : Error("token id " + std::to_string(id) + ": " + why) {}
};

class SlotArityMismatch : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

class UnkPolicyViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace astseq
