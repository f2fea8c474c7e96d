#pragma once

#include <stdexcept>
#include <string>

namespace relapprox {

// Every failure carries the pipeline stage that raised it ("enumeration",
// "plan", "initial_sample", "moser_tardos", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace relapprox
