#pragma once

#include <stdexcept>
#include <string>

namespace sfusion {

// Malformed or inconsistent input data. Maps to CLI exit code 2.
struct DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad arguments or configuration. Maps to CLI exit code 1.
struct UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BackendErrorKind {
  Network,
  RateLimit,
  Auth,
  CacheMiss,
  BadResponse,
  MockExhausted,
};

const char* to_string(BackendErrorKind kind);

// Failure raised by an LLM backend. Maps to CLI exit code 3.
struct BackendError : public std::runtime_error {
  BackendErrorKind kind;
  BackendError(BackendErrorKind k, const std::string& message)
      : std::runtime_error(std::string(to_string(k)) + ": " + message), kind(k) {}
};

}  // namespace sfusion
