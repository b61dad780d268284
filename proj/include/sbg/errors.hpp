#pragma once

#include <stdexcept>
#include <string>

namespace sbg {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateSegment,
  kInvalidRate,
  kTooShort,
  kShapeMismatch,
  kGraphError,
  kLengthMismatch,
  kMissingJoint,
  kParseError,
  kIoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A skeleton segment too short to define a direction. Joint indices are
// 1-based (torso = 1 .. right wrist = 9).
class DegenerateSegmentError : public Error {
 public:
  DegenerateSegmentError(int from_joint, int to_joint)
      : Error(ErrorCode::kDegenerateSegment,
              "degenerate segment between joints " + std::to_string(from_joint) +
                  " and " + std::to_string(to_joint)),
        from_(from_joint),
        to_(to_joint) {}

  int from_joint() const noexcept { return from_; }
  int to_joint() const noexcept { return to_; }

 private:
  int from_;
  int to_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:   return "INVALID_ARGUMENT";
    case ErrorCode::kDegenerateSegment: return "DEGENERATE_SEGMENT";
    case ErrorCode::kInvalidRate:       return "INVALID_RATE";
    case ErrorCode::kTooShort:          return "TOO_SHORT";
    case ErrorCode::kShapeMismatch:     return "SHAPE_MISMATCH";
    case ErrorCode::kGraphError:        return "GRAPH_ERROR";
    case ErrorCode::kLengthMismatch:    return "LENGTH_MISMATCH";
    case ErrorCode::kMissingJoint:      return "MISSING_JOINT";
    case ErrorCode::kParseError:        return "PARSE_ERROR";
    case ErrorCode::kIoError:           return "IO_ERROR";
  }
  return "UNKNOWN";
}

}  // namespace sbg
