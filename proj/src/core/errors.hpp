#pragma once

#include <stdexcept>
#include <string>

namespace trajedit {

// Every failure raised by the core derives from Error; the C API maps the
// concrete type onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class PlanningError : public Error {
 public:
  using Error::Error;
};

class SearchError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class RefusedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Rethrows the in-flight exception with "context: " prepended, keeping its
// concrete Error type. Non-Error exceptions become Error.
[[noreturn]] void rethrow_with_context(const std::string& context);

template <class F>
auto with_context(const std::string& context, F&& f) {
  try {
    return f();
  } catch (...) {
    rethrow_with_context(context);
  }
}

}  // namespace trajedit
