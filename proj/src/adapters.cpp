#include "ans/adapters.hpp"

#include "ans/errors.hpp"
#include "ans/schema_registry.hpp"

namespace ans {
namespace {

bool is_reserved_envelope_key(const std::string& key) {
  return key == "ansName" || key == "endpoint";
}

const Json& require_key(const Json& extensions, const std::string& key, const char* protocol) {
  auto it = extensions.find(key);
  if (it == extensions.end())
    throw AnsError(ErrorCode::MissingRequiredKey,
                   std::string(protocol) + " extensions missing required key \"" + key + "\"");
  return *it;
}

void require_object(const Json& extensions, const char* protocol) {
  if (!extensions.is_object())
    throw AnsError(ErrorCode::MalformedExtension,
                   std::string(protocol) + " protocolExtensions must be a JSON object");
}

void add_raw_leftovers(const Json& extensions, const std::set<std::string>& known,
                       const std::string& prefix, NormalizedMetadata& out) {
  for (auto it = extensions.begin(); it != extensions.end(); ++it) {
    if (known.count(it.key()) || is_reserved_envelope_key(it.key())) continue;
    out.entries[prefix + ".raw." + it.key()] = it.value();
  }
}

Json discovery_base(const DiscoveryInput& input) {
  Json doc = Json::object();
  if (input.extensions.is_object()) {
    for (auto it = input.extensions.begin(); it != input.extensions.end(); ++it)
      if (!is_reserved_envelope_key(it.key())) doc[it.key()] = it.value();
  }
  doc["ansName"] = input.ans_name;
  doc["endpoint"] = input.endpoint;
  return doc;
}

class McpAdapter final : public ProtocolAdapter {
 public:
  Protocol protocol() const override { return Protocol::Mcp; }

  std::vector<std::string> required_extension_keys() const override {
    return {"description", "mcpEndpoint", "input_schema", "output_schema"};
  }

  NormalizedMetadata parse_metadata(const Json& extensions) const override {
    require_object(extensions, "mcp");
    NormalizedMetadata out;
    const Json& description = require_key(extensions, "description", "mcp");
    if (!description.is_string())
      throw AnsError(ErrorCode::MalformedExtension, "mcp description must be a string");
    const Json& endpoint = require_key(extensions, "mcpEndpoint", "mcp");
    if (!endpoint.is_string())
      throw AnsError(ErrorCode::MalformedExtension, "mcp mcpEndpoint must be a string");
    const Json& input_schema = require_key(extensions, "input_schema", "mcp");
    const Json& output_schema = require_key(extensions, "output_schema", "mcp");

    out.entries["mcp.description"] = description;
    out.entries["mcp.endpoint"] = endpoint;
    out.entries["mcp.input_schema_digest"] = sha256_hex(canonicalize(input_schema));
    out.entries["mcp.output_schema_digest"] = sha256_hex(canonicalize(output_schema));
    add_raw_leftovers(extensions,
                      {"description", "mcpEndpoint", "input_schema", "output_schema"}, "mcp", out);
    return out;
  }

  bool validate_registration(const Json& request,
                             std::vector<std::string>& violations) const override {
    const Json extensions = request.value("protocolExtensions", Json::object());
    try {
      parse_metadata(extensions);
    } catch (const AnsError& e) {
      violations.push_back(e.what());
      return false;
    }
    std::string why;
    if (!SchemaRegistry::looks_like_json_schema(extensions.at("input_schema"), &why))
      violations.push_back("input_schema is not a well-formed JSON Schema: " + why);
    if (!SchemaRegistry::looks_like_json_schema(extensions.at("output_schema"), &why))
      violations.push_back("output_schema is not a well-formed JSON Schema: " + why);
    return violations.empty();
  }

  Json create_discovery_response(const DiscoveryInput& input) const override {
    return discovery_base(input);
  }
};

class A2aAdapter final : public ProtocolAdapter {
 public:
  Protocol protocol() const override { return Protocol::A2a; }

  std::vector<std::string> required_extension_keys() const override {
    return {"agentCard", "cardDigest"};
  }

  NormalizedMetadata parse_metadata(const Json& extensions) const override {
    require_object(extensions, "a2a");
    NormalizedMetadata out;
    const Json& card = require_key(extensions, "agentCard", "a2a");
    if (!card.is_object())
      throw AnsError(ErrorCode::MalformedExtension, "a2a agentCard must be a JSON object");
    const Json& digest = require_key(extensions, "cardDigest", "a2a");
    if (!digest.is_string())
      throw AnsError(ErrorCode::MalformedExtension, "a2a cardDigest must be a string");

    out.entries["a2a.agent_card"] = card;
    out.entries["a2a.card_digest"] = digest;
    // The card itself is opaque except for its address member.
    if (auto it = card.find("endpoint"); it != card.end() && it->is_string())
      out.entries["a2a.endpoint"] = *it;
    else if (auto url = card.find("url"); url != card.end() && url->is_string())
      out.entries["a2a.endpoint"] = *url;
    else
      throw AnsError(ErrorCode::MissingRequiredKey,
                     "a2a agentCard carries no \"endpoint\" or \"url\" string member");
    add_raw_leftovers(extensions, {"agentCard", "cardDigest"}, "a2a", out);
    return out;
  }

  bool validate_registration(const Json& request,
                             std::vector<std::string>& violations) const override {
    const Json extensions = request.value("protocolExtensions", Json::object());
    try {
      parse_metadata(extensions);
    } catch (const AnsError& e) {
      violations.push_back(e.what());
      return false;
    }
    std::string want = sha256_hex(canonicalize(extensions.at("agentCard")));
    std::string got = extensions.at("cardDigest").get<std::string>();
    if (want != got)
      violations.push_back("agent card integrity failure: cardDigest " + got +
                           " does not match card bytes " + want);
    return violations.empty();
  }

  Json create_discovery_response(const DiscoveryInput& input) const override {
    return discovery_base(input);
  }
};

class AcpAdapter final : public ProtocolAdapter {
 public:
  explicit AcpAdapter(std::set<std::string> roles) : roles_(std::move(roles)) {}

  Protocol protocol() const override { return Protocol::Acp; }

  std::vector<std::string> required_extension_keys() const override { return {"role", "profile"}; }

  NormalizedMetadata parse_metadata(const Json& extensions) const override {
    require_object(extensions, "acp");
    NormalizedMetadata out;
    const Json& role = require_key(extensions, "role", "acp");
    if (!role.is_string())
      throw AnsError(ErrorCode::MalformedExtension, "acp role must be a string");
    const Json& profile = require_key(extensions, "profile", "acp");
    if (!profile.is_object())
      throw AnsError(ErrorCode::MalformedExtension, "acp profile must be a JSON object");
    auto endpoint = profile.find("endpoint");
    if (endpoint == profile.end() || !endpoint->is_string())
      throw AnsError(ErrorCode::MissingRequiredKey,
                     "acp profile carries no \"endpoint\" string member");

    out.entries["acp.role"] = role;
    out.entries["acp.profile"] = profile;
    out.entries["acp.endpoint"] = *endpoint;
    add_raw_leftovers(extensions, {"role", "profile"}, "acp", out);
    return out;
  }

  bool validate_registration(const Json& request,
                             std::vector<std::string>& violations) const override {
    const Json extensions = request.value("protocolExtensions", Json::object());
    try {
      parse_metadata(extensions);
    } catch (const AnsError& e) {
      violations.push_back(e.what());
      return false;
    }
    std::string role = extensions.at("role").get<std::string>();
    if (!roles_.count(role)) {
      std::string allowed;
      for (const auto& r : roles_) allowed += (allowed.empty() ? "" : ", ") + r;
      violations.push_back("acp role \"" + role + "\" outside configured set {" + allowed + "}");
    }
    return violations.empty();
  }

  Json create_discovery_response(const DiscoveryInput& input) const override {
    return discovery_base(input);
  }

 private:
  std::set<std::string> roles_;
};

}  // namespace

std::string NormalizedMetadata::endpoint(Protocol p) const {
  const Json* v = find(std::string(protocol_name(p)) + ".endpoint");
  return v && v->is_string() ? v->get<std::string>() : "";
}

std::set<std::string> default_acp_roles() {
  return {"assistant", "worker", "coordinator", "supervisor", "tool"};
}

AdapterSet AdapterSet::standard(std::set<std::string> acp_roles) {
  AdapterSet set;
  set.adapters_[Protocol::A2a] = std::make_shared<A2aAdapter>();
  set.adapters_[Protocol::Mcp] = std::make_shared<McpAdapter>();
  set.adapters_[Protocol::Acp] = std::make_shared<AcpAdapter>(std::move(acp_roles));
  return set;
}

const ProtocolAdapter& AdapterSet::get(Protocol p) const {
  auto it = adapters_.find(p);
  if (it == adapters_.end())
    throw AnsError(ErrorCode::UnknownProtocol,
                   std::string("no adapter registered for protocol ") + protocol_name(p));
  return *it->second;
}

const ProtocolAdapter& AdapterSet::get(const std::string& protocol) const {
  auto p = protocol_from_string(protocol);
  if (!p || *p == Protocol::Extensible)
    throw AnsError(ErrorCode::UnknownProtocol, "no adapter registered for protocol " + protocol);
  return get(*p);
}

std::vector<Protocol> AdapterSet::protocols() const {
  std::vector<Protocol> out;
  for (const auto& [p, _] : adapters_) out.push_back(p);
  return out;
}

}  // namespace ans
