#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace suspense {

enum class ErrorKind {
  MalformedLine,
  DuplicateStoryId,
  DimMismatch,
  NonFiniteComponent,
  MissingSentence,
  OutOfRange,
  ZeroNormVector,
  EmptyCandidateSet,
  InsufficientCorpus,
  EmptyDepth,
  NonPositiveProbability,
  NotADistribution,
  NegativeAlpha,
  DegenerateSeries,
  MissingTree,
  LengthMismatch,
  InsufficientData,
  InsufficientAnnotators,
  TooFewSamples,
  DegenerateData,
  EmptyWindow,
  InvalidConfig,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::DuplicateStoryId: return "DuplicateStoryId";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NonFiniteComponent: return "NonFiniteComponent";
    case ErrorKind::MissingSentence: return "MissingSentence";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ZeroNormVector: return "ZeroNormVector";
    case ErrorKind::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorKind::InsufficientCorpus: return "InsufficientCorpus";
    case ErrorKind::EmptyDepth: return "EmptyDepth";
    case ErrorKind::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorKind::NotADistribution: return "NotADistribution";
    case ErrorKind::NegativeAlpha: return "NegativeAlpha";
    case ErrorKind::DegenerateSeries: return "DegenerateSeries";
    case ErrorKind::MissingTree: return "MissingTree";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InsufficientAnnotators: return "InsufficientAnnotators";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace suspense
