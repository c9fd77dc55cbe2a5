#pragma once

#include <stdexcept>
#include <string>

namespace uqband {

// Mismatched grid/field dimensions between operands or files.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string &msg) : std::runtime_error(msg) {}
};

// Invalid parameters: step sizes, quantile levels, incompatible sampler/prior pairs.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

// A Markov chain produced a non-finite value; carries the iteration index.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string &msg, long iteration)
      : std::runtime_error(msg + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string &msg) : std::runtime_error(msg) {}
};

// Query outside the attainable range of a transform (e.g. variance level sets).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string &msg) : std::runtime_error(msg) {}
};

// Not enough data for a statistically meaningful estimate.
class StatError : public std::runtime_error {
 public:
  explicit StatError(const std::string &msg) : std::runtime_error(msg) {}
};

}  // namespace uqband
