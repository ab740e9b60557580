#pragma once

#include <stdexcept>
#include <string>

namespace ans {

enum class ErrorCode {
  // naming / versions
  MalformedName,
  UnknownProtocol,
  MalformedRange,
  IncompatibleVersion,
  // pki
  UnsupportedAlgorithm,
  InvalidCsr,
  UnknownSerial,
  // schemas
  UnknownKind,
  NonFiniteNumber,
  SchemaViolation,
  // registry lifecycle
  DuplicateName,
  AdapterRejection,
  UnknownAgent,
  BadProof,
  RevokedAgent,
  InactiveAgent,
  ChallengeTimeout,
  // adapters
  MissingRequiredKey,
  MalformedExtension,
  // resolution
  AgentNotFound,
  InvalidEndpoint,
  RateLimited,
  TransportError,
  // plumbing
  ConfigError,
  StoreError,
};

const char* error_code_name(ErrorCode code);

class AnsError : public std::runtime_error {
 public:
  AnsError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace ans
