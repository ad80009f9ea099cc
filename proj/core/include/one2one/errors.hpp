#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace one2one {

/// Shapes that do not line up for an operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid generator/discriminator/task description.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed config, checkpoint, CSV or PGM input. `line()` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when a loss becomes non-finite during training.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t iteration, std::string loss_name, double value)
      : std::runtime_error("non-finite loss '" + loss_name + "' (" + std::to_string(value) +
                           ") at iteration " + std::to_string(iteration)),
        iteration_(iteration),
        loss_name_(std::move(loss_name)) {}
  std::size_t iteration() const noexcept { return iteration_; }
  const std::string& loss_name() const noexcept { return loss_name_; }

 private:
  std::size_t iteration_;
  std::string loss_name_;
};

/// A metric was requested that the task cannot provide (e.g. no ground truth).
class UnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace one2one
