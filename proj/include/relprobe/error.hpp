#pragma once

#include <stdexcept>
#include <string>

namespace relprobe {

// Bad input data or configuration (missing file, malformed line, OOV node...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed line in a text input; keeps the 1-based line number.
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Training diverged or hit an internal inconsistency.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace relprobe
