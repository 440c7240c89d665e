#pragma once

#include <stdexcept>
#include <string>

namespace despeckle {

// Base class for all library failures.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an Image arrives in the wrong value domain (e.g. a Byte255
// image handed to an operation that expects Unit range).
class DomainError : public Error {
public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// PGM decode/encode failures, one kind per distinct malformation.
class PgmError : public Error {
public:
  enum class Kind { MalformedHeader, UnsupportedMaxval, TruncatedPayload, IoFailure };

  PgmError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

// Checkpoint file failures.
class CheckpointError : public Error {
public:
  explicit CheckpointError(const std::string& what) : Error(what) {}
};

// Config file failures (unknown key, bad value, unreadable file).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace despeckle
