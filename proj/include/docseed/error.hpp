#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace docseed {

// Base of every error the library raises on bad data or failed I/O.
// The CLI maps anything derived from this to exit status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (OCR TSV, FUNSD, project files).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Remote classifier unreachable or returned a non-200/unparseable reply.
class GatewayError : public Error {
 public:
  GatewayError(std::string endpoint, const std::string& cause)
      : Error("classifier endpoint " + endpoint + ": " + cause), endpoint_(std::move(endpoint)) {}
  const std::string& endpoint() const noexcept { return endpoint_; }

 private:
  std::string endpoint_;
};

// Remote classifier replied, but the reply violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Action not allowed from the record's current status.
class InvalidTransitionError : public Error {
 public:
  using Error::Error;
};

// Action was drafted against state that has since changed.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// replay() failure, tagged with the action that could not be applied.
class ReplayError : public Error {
 public:
  ReplayError(std::int64_t action_id, const std::string& cause)
      : Error("replay failed at action " + std::to_string(action_id) + ": " + cause),
        action_id_(action_id) {}
  std::int64_t action_id() const noexcept { return action_id_; }

 private:
  std::int64_t action_id_;
};

}  // namespace docseed
