#pragma once

#include <stdexcept>
#include <string>

namespace sdde {

// Bad run configuration: misaligned grids, bandwidth/resolution violations,
// unknown catalog names, malformed config files.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Random-path generation failed (e.g. covariance not positive definite).
class generation_error : public std::runtime_error {
 public:
  explicit generation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Integration produced a non-finite value.
class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdde
