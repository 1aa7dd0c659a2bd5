#pragma once

#include <stdexcept>
#include <string>

namespace medtag {

enum class ErrorCode {
  kInvalidArgument = 1,
  kRuntime = 2,
  kIo = 3,
};

/// Exception type thrown by every medtag module. The code is carried through
/// to the C API status values unchanged.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

[[noreturn]] inline void runtime_failure(const std::string& what) {
  throw Error(ErrorCode::kRuntime, what);
}

}  // namespace medtag
