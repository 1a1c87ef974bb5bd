#pragma once

#include <stdexcept>
#include <string>

namespace geoweak {

// Error families map onto CLI exit codes: validation -> 1, format/io -> 2.
enum class ErrorKind { validation, format, io };

class error : public std::runtime_error {
public:
  error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    return kind_ == ErrorKind::validation ? 1 : 2;
  }

private:
  ErrorKind kind_;
};

class validation_error : public error {
public:
  explicit validation_error(const std::string& what)
      : error(ErrorKind::validation, what) {}
};

class format_error : public error {
public:
  explicit format_error(const std::string& what)
      : error(ErrorKind::format, what) {}
};

class io_error : public error {
public:
  explicit io_error(const std::string& what) : error(ErrorKind::io, what) {}
};

}  // namespace geoweak
