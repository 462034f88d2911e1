#pragma once

#include <stdexcept>
#include <string>

namespace semcoord {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input detected before any work starts (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; carries the stage name (CLI exit code 3).
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace semcoord
