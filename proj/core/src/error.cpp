#include "kgstab/error.hpp"

#include <utility>

namespace kgstab {

Error::Error(std::string code, const std::string& message, ErrorKind kind)
    : std::runtime_error(code + ": " + message), code_(std::move(code)), kind_(kind) {}

}  // namespace kgstab
