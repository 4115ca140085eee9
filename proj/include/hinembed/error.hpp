#pragma once

#include <stdexcept>
#include <string>

namespace hinembed {

// All library failures surface as Error; the CLI turns them into exit codes,
// the python bindings into RuntimeError.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hinembed
