#pragma once

#include <stdexcept>
#include <string>

namespace driftcomp {

enum class ErrorKind {
  InvalidInput,   // shape/dimension or argument contract violated
  Parse,          // malformed file content
  Validation,     // well-formed data that breaks a domain invariant
  Labeling,       // supervised data requested from an unlabeled scenario
  Singularity,    // rank-deficient least-squares system
  Divergence,     // non-finite loss or gradient
  Configuration,  // mutually inconsistent model / pipeline settings
  Io,
  Usage,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Process exit status used by the command-line tool.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::Usage:
        return 2;
      case ErrorKind::Divergence:
        return 4;
      default:
        return 3;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace driftcomp
