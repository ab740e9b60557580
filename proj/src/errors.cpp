#include "ans/errors.hpp"

namespace ans {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedName: return "MalformedName";
    case ErrorCode::UnknownProtocol: return "UnknownProtocol";
    case ErrorCode::MalformedRange: return "MalformedRange";
    case ErrorCode::IncompatibleVersion: return "IncompatibleVersion";
    case ErrorCode::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
    case ErrorCode::InvalidCsr: return "InvalidCSR";
    case ErrorCode::UnknownSerial: return "UnknownSerial";
    case ErrorCode::UnknownKind: return "UnknownKind";
    case ErrorCode::NonFiniteNumber: return "NonFiniteNumber";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::AdapterRejection: return "AdapterRejection";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::BadProof: return "BadProof";
    case ErrorCode::RevokedAgent: return "RevokedAgent";
    case ErrorCode::InactiveAgent: return "InactiveAgent";
    case ErrorCode::ChallengeTimeout: return "ChallengeTimeout";
    case ErrorCode::MissingRequiredKey: return "MissingRequiredKey";
    case ErrorCode::MalformedExtension: return "MalformedExtension";
    case ErrorCode::AgentNotFound: return "AgentNotFound";
    case ErrorCode::InvalidEndpoint: return "InvalidEndpoint";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::StoreError: return "StoreError";
  }
  return "Unknown";
}

}  // namespace ans
