#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carserver {

enum class ErrorCode {
  UnknownId,
  UnknownAttribute,
  MissingValue,
  InvalidInstance,
  InvalidArgument,
  DimensionMismatch,
  InstanceTooLarge,
  UnknownTemplate,
  MissingParam,
  ExtraParam,
  MissingCredential,
  ProviderTimeout,
  ProviderStatus,
  ProviderResponse,
  UnknownFixture,
  InvalidConfig,
  Extraction,
  UnknownZone,
  EmptyImage,
  MissingField,
  UnresolvedPlaceholder,
  TypeMismatch,
  UnsupportedPair,
  Io,
  OutOfRange,
  MalformedCsv,
  EmptyRequirement,
  Locked,
  Rejected,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace carserver
