#pragma once

#include <map>
#include <memory>
#include <regex>
#include <string>
#include <vector>

#include "ans/json_canon.hpp"

namespace ans {

enum class MessageKind {
  RegistrationRequest,
  RegistrationResponse,
  RenewalRequest,
  RenewalResponse,
  CapabilityRequest,
  CapabilityResponse,
};

const char* message_kind_name(MessageKind kind);
MessageKind message_kind_from_string(const std::string& name);  // throws UnknownKind

struct Violation {
  std::string path;  // JSON pointer
  std::string message;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Violation> violations;

  void add(std::string path, std::string message) {
    valid = false;
    violations.push_back({std::move(path), std::move(message)});
  }
  std::string to_string() const;
};

// Draft-07 subset validator over the six vendored registry schemas. Schemas
// are loaded once, pinned against manifest.json content hashes, and compiled;
// validation afterwards is pure and safe for unrestricted concurrency.
class SchemaRegistry {
 public:
  // dir must hold manifest.json plus the six schema files it names.
  static SchemaRegistry load(const std::string& dir);  // throws ConfigError on missing/pin mismatch

  ValidationReport validate(MessageKind kind, const Json& body) const;
  ValidationReport validate(const std::string& kind_name, const Json& body) const;
  const Json& schema_for(MessageKind kind) const;

  // One-off validation against an arbitrary schema document (adapters use
  // this for embedded tool schemas). Compiles patterns on the fly.
  static ValidationReport validate_against(const Json& schema, const Json& instance);

  // Structural well-formedness of a document claiming to be a JSON Schema:
  // object (or boolean), with schema-shaped keyword values where present.
  static bool looks_like_json_schema(const Json& doc, std::string* why = nullptr);

 private:
  SchemaRegistry() = default;
  std::map<MessageKind, Json> schemas_;
  std::shared_ptr<std::map<std::string, std::regex>> patterns_;  // precompiled, immutable
};

}  // namespace ans
