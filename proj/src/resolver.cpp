#include "ans/resolver.hpp"

#include <algorithm>

#include "ans/errors.hpp"

namespace ans {

std::optional<std::size_t> negotiate_version(const std::vector<SemVer>& candidates,
                                             const VersionRange& range) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return compare_versions(candidates[a], candidates[b]) > 0;
  });
  for (std::size_t idx : order)
    if (is_version_compatible(candidates[idx], range)) return idx;
  return std::nullopt;
}

Json endpoint_record_to_wire(const EndpointRecord& record) {
  Json data = Json::parse(record.data);
  Json wire;
  wire["Endpoint"] = data.at("endpoint");
  wire["signature"] = base64_encode(record.signature.bytes);
  wire["cert"] = record.cert_pem;
  wire["record"] = std::move(data);
  return wire;
}

Json InProcessTransport::resolve_capability(const ANSName& name, const std::string& range) {
  VersionRange parsed_range = VersionRange::parse(range);
  auto records = registry_.lookup(name.scheme_string(), name.agent_id, name.capability,
                                  name.provider);
  if (records.empty()) throw AnsError(ErrorCode::AgentNotFound, "Agent not found");

  std::vector<SemVer> versions;
  versions.reserve(records.size());
  for (const auto& r : records) versions.push_back(r.name.version);
  auto best = negotiate_version(versions, parsed_range);
  if (!best)
    throw AnsError(ErrorCode::IncompatibleVersion,
                   "no registered version satisfies range " + range);
  EndpointRecord record = registry_.get_agent_endpoint_record(records[*best].agent_uuid);
  return endpoint_record_to_wire(record);
}

std::string InProcessTransport::fetch_crl() { return registry_.crl_pem(); }

VerifyOutcome verify_agent_endpoint_record(const Json& wire, const Certificate& trusted_ca,
                                           const RevocationList& crl,
                                           std::chrono::system_clock::time_point at) {
  if (!wire.is_object() || !wire.contains("Endpoint") || !wire.contains("signature") ||
      !wire.contains("cert") || !wire.contains("record"))
    return {false, "response missing Endpoint/signature/cert/record"};
  if (!wire.at("Endpoint").is_string() || !wire.at("signature").is_string() ||
      !wire.at("cert").is_string() || !wire.at("record").is_object())
    return {false, "response fields have wrong types"};

  CertificateBundle bundle;
  std::optional<PublicKey> signer;
  std::string data;
  Signature sig;
  try {
    bundle = CertificateBundle::from_pem(wire.at("cert").get<std::string>());
    signer = bundle.leaf().public_key();
    data = canonicalize(wire.at("record"));
    sig.bytes = base64_decode(wire.at("signature").get<std::string>());
    sig.algorithm = signer->algorithm();
  } catch (const std::exception& e) {
    return {false, std::string("undecodable response material: ") + e.what()};
  }

  if (!verify_signature(data, sig, *signer)) return {false, "InvalidSignature"};

  ChainResult chain = verify_cert_chain(bundle, trusted_ca, crl, at);
  if (!chain.ok())
    return {false, std::string(chain_status_name(chain.status)) +
                       (chain.detail.empty() ? "" : ": " + chain.detail)};

  const Json& record = wire.at("record");
  auto agent_cert_it = record.find("agentCertificate");
  if (agent_cert_it == record.end() || !agent_cert_it->is_string())
    return {false, "signed record carries no agentCertificate"};
  try {
    CertificateBundle agent_bundle =
        CertificateBundle::from_pem(agent_cert_it->get<std::string>());
    ChainResult agent_chain = verify_cert_chain(agent_bundle, trusted_ca, crl, at);
    if (!agent_chain.ok())
      return {false, std::string("agent certificate: ") + chain_status_name(agent_chain.status) +
                         (agent_chain.detail.empty() ? "" : ": " + agent_chain.detail)};
  } catch (const std::exception& e) {
    return {false, std::string("undecodable agentCertificate: ") + e.what()};
  }

  auto endpoint_it = record.find("endpoint");
  if (endpoint_it == record.end() || !endpoint_it->is_string() ||
      endpoint_it->get<std::string>() != wire.at("Endpoint").get<std::string>())
    return {false, "Endpoint field contradicts the signed record"};
  auto ttl_it = record.find("ttlSeconds");
  if (ttl_it == record.end() || !ttl_it->is_number_integer() || ttl_it->get<std::int64_t>() <= 0)
    return {false, "signed record carries no positive ttlSeconds"};

  return {true, ""};
}

Resolver::Resolver(std::shared_ptr<RegistryTransport> transport, Certificate trust_anchor,
                   Clock clock)
    : Resolver(std::move(transport), std::move(trust_anchor), std::move(clock), Options()) {}

Resolver::Resolver(std::shared_ptr<RegistryTransport> transport, Certificate trust_anchor,
                   Clock clock, Options options)
    : transport_(std::move(transport)),
      trust_anchor_(std::move(trust_anchor)),
      clock_(std::move(clock)),
      options_(options) {}

std::string Resolver::tuple_key(const ANSName& name) const {
  return name.scheme_string() + "\x1f" + name.agent_id + "\x1f" + name.capability + "\x1f" +
         name.provider;
}

void Resolver::ensure_crl_locked() {
  std::int64_t now = to_unix_seconds(clock_());
  if (crl_loaded_) {
    if (!options_.refresh_crl) return;
    std::int64_t window = crl_.next_update > crl_.issued_at
                              ? (crl_.next_update - crl_.issued_at)
                              : 0;
    std::int64_t refresh_at = crl_fetched_at_ + window / 2;
    if (window > 0 && now < refresh_at) return;
    if (window == 0 && crl_fetched_at_ == now) return;
  }
  std::string pem = transport_->fetch_crl();
  crl_fetches_.fetch_add(1);
  crl_ = parse_crl_pem(pem);
  crl_loaded_ = true;
  crl_fetched_at_ = now;
}

std::shared_ptr<std::mutex> Resolver::flight_for(const std::string& key) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = flights_.find(key);
  if (it == flights_.end()) it = flights_.emplace(key, std::make_shared<std::mutex>()).first;
  return it->second;
}

std::optional<ResolvedEndpoint> Resolver::cache_peek(const std::string& name,
                                                     const std::string& range) {
  ANSName parsed = ANSName::parse(name);
  std::string tuple = tuple_key(parsed);
  std::lock_guard<std::mutex> lock(mu_);
  auto memo = range_memo_.find(tuple + "\x1f" + range);
  if (memo == range_memo_.end()) return std::nullopt;
  auto it = cache_.find(tuple + "\x1f" + memo->second);
  if (it == cache_.end()) return std::nullopt;
  if (to_unix_seconds(clock_()) >= it->second.expires_at) return std::nullopt;
  return it->second;
}

ResolvedEndpoint Resolver::resolve(const std::string& name_text, const std::string& range_text) {
  ANSName name = ANSName::parse(name_text);               // MalformedName
  VersionRange range = VersionRange::parse(range_text);   // MalformedRange
  std::string tuple = tuple_key(name);
  std::string memo_key = tuple + "\x1f" + range_text;

  auto check_cache = [&]() -> std::optional<ResolvedEndpoint> {
    std::lock_guard<std::mutex> lock(mu_);
    auto memo = range_memo_.find(memo_key);
    if (memo == range_memo_.end()) return std::nullopt;
    auto it = cache_.find(tuple + "\x1f" + memo->second);
    if (it == cache_.end()) return std::nullopt;
    if (to_unix_seconds(clock_()) >= it->second.expires_at) {
      cache_.erase(it);  // never serve stale
      return std::nullopt;
    }
    return it->second;
  };

  if (auto hit = check_cache()) return *hit;

  auto flight = flight_for(memo_key);
  std::lock_guard<std::mutex> flight_lock(*flight);
  if (auto hit = check_cache()) return *hit;  // a peer filled it while we waited

  Json wire = transport_->resolve_capability(name, range_text);
  fetches_.fetch_add(1);

  RevocationList crl;
  {
    std::lock_guard<std::mutex> lock(mu_);
    ensure_crl_locked();
    crl = crl_;
  }

  std::int64_t now = to_unix_seconds(clock_());
  VerifyOutcome outcome = verify_agent_endpoint_record(wire, trust_anchor_, crl, clock_());
  if (!outcome.ok)
    throw AnsError(ErrorCode::InvalidEndpoint, "Invalid Endpoint: " + outcome.reason);

  const Json& record = wire.at("record");
  ANSName resolved_name;
  try {
    resolved_name = ANSName::parse(record.at("ansName").get<std::string>());
  } catch (const std::exception&) {
    throw AnsError(ErrorCode::InvalidEndpoint, "Invalid Endpoint: record carries no usable ansName");
  }
  if (!resolved_name.same_tuple(name))
    throw AnsError(ErrorCode::InvalidEndpoint,
                   "Invalid Endpoint: record names a different agent tuple");
  if (!is_version_compatible(resolved_name.version, range))
    throw AnsError(ErrorCode::InvalidEndpoint,
                   "Invalid Endpoint: negotiated version " + resolved_name.version.to_string() +
                       " does not satisfy range " + range_text);

  std::int64_t ttl = record.at("ttlSeconds").get<std::int64_t>();
  std::int64_t issued_at = record.value("issuedAt", now);
  if (now - issued_at > ttl)
    throw AnsError(ErrorCode::InvalidEndpoint, "Invalid Endpoint: record is older than its TTL");

  ResolvedEndpoint resolved;
  resolved.endpoint = wire.at("Endpoint").get<std::string>();
  resolved.agent_certificate =
      CertificateBundle::from_pem(record.at("agentCertificate").get<std::string>());
  resolved.ans_name = resolved_name.to_string();
  resolved.negotiated_version = resolved_name.version;
  resolved.verified_at = now;
  resolved.expires_at = now + ttl;

  {
    std::lock_guard<std::mutex> lock(mu_);
    std::string version = resolved.negotiated_version.to_string();
    range_memo_[memo_key] = version;
    cache_[tuple + "\x1f" + version] = resolved;
  }
  return resolved;
}

}  // namespace ans
