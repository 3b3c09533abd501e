#pragma once

#include <stdexcept>
#include <string>

namespace dic {

// All recoverable failures in the engine throw this; the pipeline catches it
// per work item so one bad subset or pair cannot take down a run.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dic
