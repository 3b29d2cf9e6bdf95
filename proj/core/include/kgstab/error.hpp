#pragma once

#include <stdexcept>
#include <string>

namespace kgstab {

enum class ErrorKind { config, numerical };

// Errors carry a module-qualified code, e.g. "spectral.PoleOnLine".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        ErrorKind kind = ErrorKind::numerical);

  const std::string& code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  ErrorKind kind_;
};

}  // namespace kgstab
