#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cybereval {

// Base for every error the library raises. Scoring paths never let these
// escape: unscorable responses fold to a zero score instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExtractionFailed : public Error {
 public:
  using Error::Error;
};

class MalformedVector : public Error {
 public:
  using Error::Error;
};

class GroupTooSmall : public Error {
 public:
  using Error::Error;
};

class BadConstant : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidGroup : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public SchemaError {
 public:
  DuplicateId(std::size_t line, const std::string& id)
      : SchemaError(line, "duplicate task id '" + id + "'"), id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class MissingField : public Error {
 public:
  using Error::Error;
};

class EndpointError : public Error {
 public:
  using Error::Error;
};

class FixtureMissing : public EndpointError {
 public:
  using EndpointError::EndpointError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cybereval
