#pragma once

#include <stdexcept>
#include <string>

namespace ishap {

// Malformed input: CSV/JSON documents, bad CLI values, dimension mismatches.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// External predictor broke the wire protocol (died, short reply, junk float).
struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// A size guard tripped: exact search component too large, too many coalition players.
struct GuardError : std::runtime_error {
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ishap
