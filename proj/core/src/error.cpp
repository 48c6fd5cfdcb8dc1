#include "carserver/error.hpp"

namespace carserver {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId: return "unknown-id";
    case ErrorCode::UnknownAttribute: return "unknown-attribute";
    case ErrorCode::MissingValue: return "missing-value";
    case ErrorCode::InvalidInstance: return "invalid-instance";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::InstanceTooLarge: return "instance-too-large";
    case ErrorCode::UnknownTemplate: return "unknown-template";
    case ErrorCode::MissingParam: return "missing-param";
    case ErrorCode::ExtraParam: return "extra-param";
    case ErrorCode::MissingCredential: return "missing-credential";
    case ErrorCode::ProviderTimeout: return "provider-timeout";
    case ErrorCode::ProviderStatus: return "provider-status";
    case ErrorCode::ProviderResponse: return "provider-response";
    case ErrorCode::UnknownFixture: return "unknown-fixture";
    case ErrorCode::InvalidConfig: return "invalid-config";
    case ErrorCode::Extraction: return "extraction";
    case ErrorCode::UnknownZone: return "unknown-zone";
    case ErrorCode::EmptyImage: return "empty-image";
    case ErrorCode::MissingField: return "missing-field";
    case ErrorCode::UnresolvedPlaceholder: return "unresolved-placeholder";
    case ErrorCode::TypeMismatch: return "type-mismatch";
    case ErrorCode::UnsupportedPair: return "unsupported-pair";
    case ErrorCode::Io: return "io";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::MalformedCsv: return "malformed-csv";
    case ErrorCode::EmptyRequirement: return "empty-requirement";
    case ErrorCode::Locked: return "locked";
    case ErrorCode::Rejected: return "rejected";
  }
  return "unknown";
}

}  // namespace carserver
