#include "core/errors.hpp"

#include <exception>

namespace trajedit {

namespace {

template <class E>
bool rethrow_as(const std::exception& e, const std::string& message) {
  if (dynamic_cast<const E*>(&e)) throw E(message);
  return false;
}

}  // namespace

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const std::exception& e) {
    const std::string message = context + ": " + e.what();
    rethrow_as<ParseError>(e, message);
    rethrow_as<ValidationError>(e, message);
    rethrow_as<PlanningError>(e, message);
    rethrow_as<SearchError>(e, message);
    rethrow_as<RangeError>(e, message);
    rethrow_as<NotFoundError>(e, message);
    rethrow_as<RefusedError>(e, message);
    rethrow_as<IoError>(e, message);
    throw Error(message);
  } catch (...) {
    throw Error(context + ": unknown failure");
  }
}

}  // namespace trajedit
