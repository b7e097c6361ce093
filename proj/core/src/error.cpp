// SPDX-License-Identifier: Apache-2.0
#include "rehab/error.hpp"

namespace rehab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedStream: return "MalformedStream";
    case ErrorCode::BadChannel: return "BadChannel";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::EmptyDatabase: return "EmptyDatabase";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::InsufficientCalibration: return "InsufficientCalibration";
    case ErrorCode::UnsupportedSchema: return "UnsupportedSchema";
    case ErrorCode::CorruptDatabase: return "CorruptDatabase";
    case ErrorCode::NonMonotonicLog: return "NonMonotonicLog";
    case ErrorCode::InvalidCommand: return "InvalidCommand";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::MalformedPacket: return "MalformedPacket";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::TransportClosed: return "TransportClosed";
    case ErrorCode::BadScript: return "BadScript";
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::InvalidExercise: return "InvalidExercise";
    case ErrorCode::NonMonotonicInput: return "NonMonotonicInput";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::BadRequest: return "BadRequest";
    case ErrorCode::StartupFailure: return "StartupFailure";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace rehab
