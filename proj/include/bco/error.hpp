#pragma once

#include <stdexcept>
#include <string>

namespace bco {

enum class ErrorKind {
  kInvalidInput,
  kPositioningViolation,
  kDegenerateBody,
  kRatioOverflow,
  kInfeasible,
  kUnsupportedBody,
  kConfig,
  kIo,
  kInternal,
};

const char* ToString(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ToString(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised by the density ratio when log R exceeds the representable range.
class RatioOverflow : public Error {
 public:
  explicit RatioOverflow(double log_ratio)
      : Error(ErrorKind::kRatioOverflow, "log density ratio " + std::to_string(log_ratio)),
        log_ratio_(log_ratio) {}

  double log_ratio() const { return log_ratio_; }

 private:
  double log_ratio_;
};

inline const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return "invalid input";
    case ErrorKind::kPositioningViolation:
      return "positioning violation";
    case ErrorKind::kDegenerateBody:
      return "degenerate body";
    case ErrorKind::kRatioOverflow:
      return "ratio overflow";
    case ErrorKind::kInfeasible:
      return "infeasible";
    case ErrorKind::kUnsupportedBody:
      return "unsupported body";
    case ErrorKind::kConfig:
      return "config error";
    case ErrorKind::kIo:
      return "i/o error";
    case ErrorKind::kInternal:
      return "internal error";
  }
  return "unknown";
}

}  // namespace bco
