#pragma once

#include <stdexcept>
#include <string>

namespace motionid {

// Base of every error raised by the library. Messages carry the module name
// as a prefix ("featurizer: ...") so CLI diagnostics point at the source.
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

}  // namespace motionid
