// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace xicor {

/// Failure category. The CLI maps these onto its exit codes.
enum class ErrorKind {
  usage,       // bad parameter or unparsable input (exit 2)
  degenerate,  // data cannot support the requested statistic (exit 3)
  numeric,     // a numerical routine failed to converge or went non-positive (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<double> last_estimate = std::nullopt)
      : std::runtime_error(what), kind_(kind), last_estimate_(last_estimate) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Best value reached before a numeric failure, when there is one.
  std::optional<double> last_estimate() const noexcept { return last_estimate_; }

  Error with_context(const std::string& prefix) const {
    return Error(kind_, prefix + what(), last_estimate_);
  }

 private:
  ErrorKind kind_;
  std::optional<double> last_estimate_;
};

[[noreturn]] inline void throw_usage(const std::string& what) {
  throw Error(ErrorKind::usage, what);
}

[[noreturn]] inline void throw_degenerate(const std::string& what) {
  throw Error(ErrorKind::degenerate, what);
}

inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
      return 2;
    case ErrorKind::degenerate:
      return 3;
    case ErrorKind::numeric:
      return 4;
  }
  return 1;
}

}  // namespace xicor
