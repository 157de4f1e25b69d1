#pragma once

#include <stdexcept>
#include <string>

namespace pcrk {

// File system / format problems. The CLI maps these to exit code 2
// (bad input), everything else derived from std::runtime_error to 3.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcrk
