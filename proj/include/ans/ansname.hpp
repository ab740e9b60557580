#pragma once

#include <optional>
#include <string>

#include "ans/semver.hpp"

namespace ans {

enum class Protocol { A2a, Mcp, Acp, Extensible };

const char* protocol_name(Protocol p);
std::optional<Protocol> protocol_from_string(const std::string& s);

// Structured agent name:
//   protocol://agentID.capability.provider.vMAJOR.MINOR.PATCH[-pre][+build][.extension]
//
// Labels (agentID, capability, provider, extension segments) are restricted
// to [A-Za-z0-9_-] so dot-splitting is unambiguous. The version starts at the
// first label of the form v<digits> (optionally carrying a single -/+ suffix);
// following purely-numeric labels fold into it; everything after is the
// extension. A consequence: prerelease/build identifiers containing '.' do
// not survive a pack/parse round trip (the dotted tail parses as extension),
// so canonical names keep them dot-free.
struct ANSName {
  Protocol protocol = Protocol::Extensible;
  std::string scheme;  // literal scheme text, meaningful when protocol == Extensible
  std::string agent_id;
  std::string capability;
  std::string provider;
  SemVer version;
  std::optional<std::string> extension;

  // Parses a packed name. Throws AnsError(MalformedName) on grammar
  // violations. Unknown schemes are not an error: they parse as Extensible
  // and keep the scheme text (the registry rejects them later).
  static ANSName parse(const std::string& s);

  // Canonical form; partial versions come back zero-padded.
  std::string to_string() const;

  std::string scheme_string() const;

  // Lookup key (protocol, agentID, capability, provider).
  bool same_tuple(const ANSName& o) const;

  friend bool operator==(const ANSName& a, const ANSName& b);
};

}  // namespace ans
