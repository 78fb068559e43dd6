#pragma once

#include <stdexcept>
#include <string>

namespace hazard {

// Broad failure classes. The CLI maps Input/Planning/DegenerateEvidence to
// exit status 1 and Contract/Internal to exit status 2.
enum class ErrorKind {
  kInput,
  kPlanning,
  kDegenerateEvidence,
  kContract,
  kInternal,
};

/// Exception carrying a stable machine-readable code such as
/// `E_MATRIX_MISSING` alongside the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

[[noreturn]] inline void ThrowInput(const std::string& code,
                                    const std::string& message) {
  throw Error(ErrorKind::kInput, code, message);
}

[[noreturn]] inline void ThrowContract(const std::string& message) {
  throw Error(ErrorKind::kContract, "E_CONTRACT", message);
}

}  // namespace hazard
