#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shiftdiv {

// Every error raised by the library derives from Error. The CLI maps
// InputError (and its subclasses) to exit code 1 and anything else to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied data or configuration that violates a documented contract.
class InputError : public Error {
 public:
  using Error::Error;
};

// A named file does not exist or cannot be opened.
class InputMissingError : public InputError {
 public:
  using InputError::InputError;
};

// A file was readable but malformed. line() is 1-based, 0 when not
// applicable (e.g. a whole-document JSON error).
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InputError(format(source, line, what)), source_(source), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            const std::string& what) {
    std::string out = source;
    if (line > 0) out += ":" + std::to_string(line);
    out += ": " + what;
    return out;
  }

  std::string source_;
  std::size_t line_;
};

// The requested analytic oracle does not cover this distribution shape.
class UnsupportedSpecError : public InputError {
 public:
  using InputError::InputError;
};

// Inconsistent train/test direction wiring between runs.
class ConfigurationError : public InputError {
 public:
  using InputError::InputError;
};

// Unknown metric or system name.
class LookupError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace shiftdiv
