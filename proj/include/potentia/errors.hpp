#pragma once

#include <stdexcept>
#include <string>

namespace potentia {

enum class ErrorCode {
  invalid_argument,
  invalid_configuration,
  scene_json,       // malformed JSON text
  scene_schema,     // well-formed JSON violating the scene schema
  scene_overlap,    // overlapping balls
  scene_dimension,  // inconsistent dimensions
  compute,
  io,
};

/// Domain error carrying a stable code so the C boundary and the CLI can map
/// failures without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace potentia
