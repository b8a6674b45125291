#include "darkpool/error.hpp"

namespace darkpool {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kWrongContentType: return "WrongContentType";
    case ErrorCode::kSnapshotAborted: return "SnapshotAborted";
    case ErrorCode::kDuplicateSnapshotId: return "DuplicateSnapshotId";
    case ErrorCode::kUnknownSnapshotId: return "UnknownSnapshotId";
    case ErrorCode::kCorruptSnapshot: return "CorruptSnapshot";
    case ErrorCode::kMalformedHar: return "MalformedHar";
    case ErrorCode::kNoContactFound: return "NoContactFound";
    case ErrorCode::kProbeUnavailable: return "ProbeUnavailable";
    case ErrorCode::kEmptyRecipientSet: return "EmptyRecipientSet";
    case ErrorCode::kMissingContact: return "MissingContact";
    case ErrorCode::kNothingToReport: return "NothingToReport";
    case ErrorCode::kControlGroupWithheld: return "ControlGroupWithheld";
    case ErrorCode::kOverlapWithPriorRound: return "OverlapWithPriorRound";
    case ErrorCode::kEmptyControlPool: return "EmptyControlPool";
    case ErrorCode::kNoPairs: return "NoPairs";
    case ErrorCode::kUnknownEntity: return "UnknownEntity";
    case ErrorCode::kDegenerateSample: return "DegenerateSample";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kWorkspaceLocked: return "WorkspaceLocked";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace darkpool
