#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace darkpool {

enum class ErrorCode {
  kWrongContentType,
  kSnapshotAborted,
  kDuplicateSnapshotId,
  kUnknownSnapshotId,
  kCorruptSnapshot,
  kMalformedHar,
  kNoContactFound,
  kProbeUnavailable,
  kEmptyRecipientSet,
  kMissingContact,
  kNothingToReport,
  kControlGroupWithheld,
  kOverlapWithPriorRound,
  kEmptyControlPool,
  kNoPairs,
  kUnknownEntity,
  kDegenerateSample,
  kInvalidConfig,
  kInvalidInput,
  kWorkspaceLocked,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All pipeline failures surface as this type; `code()` is the stable,
// machine-readable part and is what the CLI reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace darkpool
