#pragma once

#include <stdexcept>
#include <string>

namespace stacklp {

/// Broad failure categories; the CLI maps each to a distinct exit code.
enum class ErrorCategory {
  kInvalidArgument,  // bad parameter or precondition
  kConfig,           // configuration schema violation
  kIo,               // unreadable or malformed input
  kData,             // input is well-formed but unusable (too few edges, ...)
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCategory::kInvalidArgument, what);
}

}  // namespace stacklp
