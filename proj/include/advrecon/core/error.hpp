#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace advrecon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Invalid or infeasible configuration, detected before any work is done.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public NumericalError {
 public:
  TrainingError(const std::string& what, int epoch, int batch)
      : NumericalError(what + " (epoch " + std::to_string(epoch) + ", batch " +
                       std::to_string(batch) + ")"),
        epoch_(epoch),
        batch_(batch) {}
  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline void expects(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

inline void expects(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace advrecon
