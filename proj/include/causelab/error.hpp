#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causelab {

enum class ErrorCategory {
  usage,
  io,
  parse,
  invalid_argument,
  undefined_quantity,
  insufficient_data,
  missing_prerequisite,
  stale,
  diverged,
};

std::string_view category_name(ErrorCategory c) noexcept;

/// Process exit code for a failure of the given category (always nonzero).
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace causelab
