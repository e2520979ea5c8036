#pragma once

#include <stdexcept>
#include <string>

namespace sim {

// Every failure the harness can report, across all modules. Metric
// absences (no valid overlap, empty denominator) are values, not errors,
// and never reach this enum from the happy path.
enum class ErrorKind {
  // corpus
  MissingField,
  BadLabel,
  BadLikert,
  DuplicateId,
  EmptyCorpus,
  MalformedRecord,
  UnknownField,
  UnknownColumn,
  AllRowsSkipped,
  EmptyVotes,
  // personas
  DuplicateName,
  PlaceholderMissing,
  BadCategory,
  // backend
  BackendUnreachable,
  AuthFailed,
  MalformedReply,
  UnknownKey,
  DuplicateKey,
  // store
  StoreCorrupt,
  IoFailure,
  // metrics
  NoValidOverlap,
  EmptyHistogram,
  GroupTooSmall,
  SeriesLengthMismatch,
  // cli
  BadConfig,
  IncompleteRun,
  MissingMetrics,
  LockHeld,
};

const char* to_string(ErrorKind kind);

class SimError : public std::runtime_error {
 public:
  SimError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw SimError(kind, message);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::BadLikert: return "BadLikert";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::UnknownField: return "UnknownField";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::AllRowsSkipped: return "AllRowsSkipped";
    case ErrorKind::EmptyVotes: return "EmptyVotes";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::PlaceholderMissing: return "PlaceholderMissing";
    case ErrorKind::BadCategory: return "BadCategory";
    case ErrorKind::BackendUnreachable: return "BackendUnreachable";
    case ErrorKind::AuthFailed: return "AuthFailed";
    case ErrorKind::MalformedReply: return "MalformedReply";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::StoreCorrupt: return "StoreCorrupt";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::NoValidOverlap: return "NoValidOverlap";
    case ErrorKind::EmptyHistogram: return "EmptyHistogram";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::SeriesLengthMismatch: return "SeriesLengthMismatch";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::IncompleteRun: return "IncompleteRun";
    case ErrorKind::MissingMetrics: return "MissingMetrics";
    case ErrorKind::LockHeld: return "LockHeld";
  }
  return "Unknown";
}

}  // namespace sim
