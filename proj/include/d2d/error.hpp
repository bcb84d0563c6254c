#pragma once

#include <stdexcept>
#include <string>

namespace d2d {

/// Library error carrying a stable machine-readable code next to the message.
/// The CLI prints `error: <code>: <message>` and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace d2d
