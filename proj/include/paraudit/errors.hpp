#pragma once

#include <stdexcept>
#include <string>

namespace paraudit {

// Malformed input file or record.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a domain invariant.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failure while executing a plan (I/O, adapter configuration).
struct ExecutionError : std::runtime_error {
  explicit ExecutionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Adapter failure that is worth retrying (timeouts, rate limits, 5xx).
struct TransientAdapterError : std::runtime_error {
  explicit TransientAdapterError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace paraudit
