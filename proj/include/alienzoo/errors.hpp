#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace alienzoo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called in a phase that does not accept it.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Input failed a domain check. `fields` names the offending items, if any.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::vector<std::string> fields = {})
      : Error(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  std::vector<std::string> fields_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration (e.g. a policy that cannot run in the chosen condition).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace alienzoo
