#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ans/ansname.hpp"
#include "ans/json_canon.hpp"

namespace ans {

// Flat, protocol-namespaced view of a protocolExtensions blob
// (e.g. "mcp.endpoint" -> "https://..."). Unknown keys are preserved under
// "<protocol>.raw.<key>". The envelope keys "ansName" and "endpoint" are
// reserved for discovery responses and never normalized.
struct NormalizedMetadata {
  std::map<std::string, Json> entries;

  const Json* find(const std::string& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }
  // "<protocol>.endpoint" entry; empty string when absent
  std::string endpoint(Protocol p) const;
  bool operator==(const NormalizedMetadata& other) const { return entries == other.entries; }
};

// What an adapter needs from an agent record to shape a discovery response.
struct DiscoveryInput {
  std::string ans_name;
  std::string endpoint;
  Json extensions;  // stored protocolExtensions
};

class ProtocolAdapter {
 public:
  virtual ~ProtocolAdapter() = default;

  virtual Protocol protocol() const = 0;
  virtual std::vector<std::string> required_extension_keys() const = 0;

  // Total over arbitrary JSON: returns normalized metadata or throws a
  // structured AnsError (MissingRequiredKey, MalformedExtension); never
  // crashes on malformed input.
  virtual NormalizedMetadata parse_metadata(const Json& extensions) const = 0;

  // Protocol-specific registration checks over a schema-valid request.
  // False is accompanied by human-readable violations.
  virtual bool validate_registration(const Json& request,
                                     std::vector<std::string>& violations) const = 0;

  // Protocol-shaped discovery document embedding ansName + endpoint. Copies
  // the stored extension fields verbatim so a re-parse reproduces the
  // record's normalized metadata.
  virtual Json create_discovery_response(const DiscoveryInput& input) const = 0;
};

// ACP role vocabularies are deployment-specific; this is the default set.
std::set<std::string> default_acp_roles();

class AdapterSet {
 public:
  static AdapterSet standard(std::set<std::string> acp_roles = default_acp_roles());

  const ProtocolAdapter& get(Protocol p) const;                 // throws UnknownProtocol
  const ProtocolAdapter& get(const std::string& protocol) const;
  std::vector<Protocol> protocols() const;

 private:
  AdapterSet() = default;
  std::map<Protocol, std::shared_ptr<ProtocolAdapter>> adapters_;
};

}  // namespace ans
