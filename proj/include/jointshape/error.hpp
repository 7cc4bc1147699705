#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jointshape {

enum class ErrorKind {
  InvalidModel,
  OverdampedUnsupported,
  StepSize,
  InvalidCommand,
  InvalidTrace,
  InsufficientOscillation,
  NonDecaying,
  InvalidPeak,
  InvalidShaper,
  InsufficientTrace,
  Parse,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidModel: return "invalid-model";
    case ErrorKind::OverdampedUnsupported: return "overdamped-unsupported";
    case ErrorKind::StepSize: return "step-size";
    case ErrorKind::InvalidCommand: return "invalid-command";
    case ErrorKind::InvalidTrace: return "invalid-trace";
    case ErrorKind::InsufficientOscillation: return "insufficient-oscillation";
    case ErrorKind::NonDecaying: return "non-decaying";
    case ErrorKind::InvalidPeak: return "invalid-peak";
    case ErrorKind::InvalidShaper: return "invalid-shaper";
    case ErrorKind::InsufficientTrace: return "insufficient-trace";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

/// Exception raised by every module in the library. Carries a machine-readable
/// kind and the name of the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace jointshape
