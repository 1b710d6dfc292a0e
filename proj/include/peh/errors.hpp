#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peh {

/// Failure categories raised by the library. The CLI maps them to exit codes.
enum class ErrorKind {
  InvalidDesign,
  SingularMaterial,
  InvalidRefinement,
  ConstraintError,
  NoPiezo,
  EigenFailure,
  SingularSystem,
  NoPeak,
  StepSizeUnderflow,
  EmptyRecord,
  DegenerateFeatures,
  AllParticlesFailed,
  InvalidArgument,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidDesign: return "InvalidDesign";
    case ErrorKind::SingularMaterial: return "SingularMaterial";
    case ErrorKind::InvalidRefinement: return "InvalidRefinement";
    case ErrorKind::ConstraintError: return "ConstraintError";
    case ErrorKind::NoPiezo: return "NoPiezo";
    case ErrorKind::EigenFailure: return "EigenFailure";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NoPeak: return "NoPeak";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::EmptyRecord: return "EmptyRecord";
    case ErrorKind::DegenerateFeatures: return "DegenerateFeatures";
    case ErrorKind::AllParticlesFailed: return "AllParticlesFailed";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// True for failures caused by bad input rather than by the numerics.
constexpr bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidDesign:
    case ErrorKind::InvalidRefinement:
    case ErrorKind::EmptyRecord:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ConfigError:
    case ErrorKind::IoError:
    case ErrorKind::NoPiezo:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace peh
