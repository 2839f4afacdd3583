#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpcontact {

enum class ErrorKind {
  EmptySupport,
  NotNormalized,
  NegativeWeight,
  DuplicateJump,
  InvalidModel,
  UnknownModel,
  ParseError,
  NoNegativeJumps,
  NoInteriorRoot,
  SupportOverflow,
  NoSignChange,
  OutOfBranch,
  MaximizerNotBracketed,
  BranchEscape,
  PoleAtEvaluation,
  TruncationInsufficient,
  PoleCollision,
  NotApplicable,
  MarginExhausted,
  UnreachableOrigin,
  IoError,
  InvalidArgument,
};

// Coarse grouping used by the CLI to pick an exit status.
enum class ErrorCategory { Validation, Numeric, Io, Usage };

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::DuplicateJump: return "DuplicateJump";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NoNegativeJumps: return "NoNegativeJumps";
    case ErrorKind::NoInteriorRoot: return "NoInteriorRoot";
    case ErrorKind::SupportOverflow: return "SupportOverflow";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::OutOfBranch: return "OutOfBranch";
    case ErrorKind::MaximizerNotBracketed: return "MaximizerNotBracketed";
    case ErrorKind::BranchEscape: return "BranchEscape";
    case ErrorKind::PoleAtEvaluation: return "PoleAtEvaluation";
    case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
    case ErrorKind::PoleCollision: return "PoleCollision";
    case ErrorKind::NotApplicable: return "NotApplicable";
    case ErrorKind::MarginExhausted: return "MarginExhausted";
    case ErrorKind::UnreachableOrigin: return "UnreachableOrigin";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

constexpr ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptySupport:
    case ErrorKind::NotNormalized:
    case ErrorKind::NegativeWeight:
    case ErrorKind::DuplicateJump:
    case ErrorKind::InvalidModel:
    case ErrorKind::UnknownModel:
    case ErrorKind::ParseError:
    case ErrorKind::NoNegativeJumps:
    case ErrorKind::NoInteriorRoot:
      return ErrorCategory::Validation;
    case ErrorKind::IoError:
      return ErrorCategory::Io;
    case ErrorKind::InvalidArgument:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Numeric;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace qpcontact
