// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rehab {

/// Typed failure categories shared by every module.
enum class ErrorCode {
  // emg-features
  MalformedStream,
  BadChannel,
  BadWindow,
  ConfigMismatch,
  EmptyDatabase,
  // template-store
  BadLabel,
  InsufficientCalibration,
  UnsupportedSchema,
  CorruptDatabase,
  NonMonotonicLog,
  // protocol
  InvalidCommand,
  UnknownCommand,
  MalformedPacket,
  MalformedFrame,
  // device-sim
  TransportClosed,
  BadScript,
  // session-engine
  EmptyPlan,
  InvalidExercise,
  NonMonotonicInput,
  // service
  Conflict,
  BadRequest,
  StartupFailure,
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rehab
