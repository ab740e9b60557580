#pragma once

#include <array>
#include <string>

namespace ans {

// RFC 4122 name-based UUIDs (version 5, SHA-1).
struct Uuid {
  std::array<unsigned char, 16> bytes{};

  std::string to_string() const;  // 8-4-4-4-12 lowercase hex
  static Uuid parse(const std::string& s);

  friend bool operator==(const Uuid& a, const Uuid& b) { return a.bytes == b.bytes; }
  friend bool operator!=(const Uuid& a, const Uuid& b) { return !(a == b); }
};

Uuid uuid_v5(const Uuid& ns, const std::string& name);

// The fixed namespace every agent UUID is derived under.
// uuid5(NAMESPACE_DNS, "ans.agent-registry.local")
const Uuid& ans_namespace_uuid();

}  // namespace ans
