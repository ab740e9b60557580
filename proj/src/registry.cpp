#include "ans/registry.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ans/errors.hpp"

namespace ans {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnsError(ErrorCode::StoreError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fresh_temp_path(const std::string& stem, const std::string& ext) {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  std::ostringstream name;
  name << stem << "-" << std::hex << dist(rd) << ext;
  return (std::filesystem::temp_directory_path() / name.str()).string();
}

std::string record_hash(const AgentRecord& record) {
  return sha256_hex(canonicalize(record.to_json()));
}

Json certificate_object(const CertificateBundle& bundle) {
  Certificate leaf = bundle.leaf();
  Json out;
  out["subject"] = leaf.subject();
  out["issuer"] = leaf.issuer();
  out["pem"] = bundle.to_pem();
  return out;
}

// Registration carries the five name fields flat; this rebuilds the ANSName
// and insists it survives a pack/parse round trip so every stored name is
// resolvable by the published grammar.
ANSName name_from_registration(const Json& request) {
  std::string version_text = request.at("version").get<std::string>();
  auto version = parse_version(version_text);
  if (!version)
    throw AnsError(ErrorCode::SchemaViolation, "version is not a full SemVer: " + version_text);

  ANSName name;
  auto p = protocol_from_string(request.at("protocol").get<std::string>());
  if (!p || *p == Protocol::Extensible)
    throw AnsError(ErrorCode::UnknownProtocol,
                   "unknown protocol: " + request.at("protocol").get<std::string>());
  name.protocol = *p;
  name.agent_id = request.at("agentID").get<std::string>();
  name.capability = request.at("agentCapability").get<std::string>();
  name.provider = request.at("provider").get<std::string>();
  name.version = *version;
  if (auto it = request.find("extension"); it != request.end() && it->is_string() &&
      !it->get<std::string>().empty())
    name.extension = it->get<std::string>();

  std::string packed = name.to_string();
  ANSName reparsed;
  try {
    reparsed = ANSName::parse(packed);
  } catch (const AnsError& e) {
    throw AnsError(ErrorCode::SchemaViolation,
                   "request fields do not form a valid agent name (" + packed + "): " + e.what());
  }
  if (!(reparsed == name))
    throw AnsError(ErrorCode::SchemaViolation,
                   "request fields do not round-trip through the name grammar: " + packed);
  return name;
}

}  // namespace

const char* agent_status_name(AgentStatus s) {
  switch (s) {
    case AgentStatus::Active:
      return "active";
    case AgentStatus::Expired:
      return "expired";
    case AgentStatus::Revoked:
      return "revoked";
    case AgentStatus::Deregistered:
      return "deregistered";
    case AgentStatus::Quarantined:
      return "quarantined";
  }
  return "unknown";
}

AgentStatus agent_status_from_string(const std::string& s) {
  if (s == "active") return AgentStatus::Active;
  if (s == "expired") return AgentStatus::Expired;
  if (s == "revoked") return AgentStatus::Revoked;
  if (s == "deregistered") return AgentStatus::Deregistered;
  if (s == "quarantined") return AgentStatus::Quarantined;
  throw AnsError(ErrorCode::StoreError, "unknown agent status: " + s);
}

Json AgentRecord::to_json() const {
  Json out;
  out["agentUuid"] = agent_uuid;
  out["ansName"] = name.to_string();
  out["certificatePem"] = certificate.to_pem();
  out["endpoint"] = endpoint;
  out["protocolExtensions"] = protocol_extensions;
  out["registeredAt"] = registered_at;
  out["renewedAt"] = renewed_at;
  out["expiresAt"] = expires_at;
  out["status"] = agent_status_name(status);
  out["consecutiveChallengeFailures"] = consecutive_challenge_failures;
  return out;
}

AgentRecord AgentRecord::from_json(const Json& doc) {
  AgentRecord r;
  r.agent_uuid = doc.at("agentUuid").get<std::string>();
  r.name = ANSName::parse(doc.at("ansName").get<std::string>());
  r.certificate = CertificateBundle::from_pem(doc.at("certificatePem").get<std::string>());
  r.endpoint = doc.at("endpoint").get<std::string>();
  r.protocol_extensions = doc.value("protocolExtensions", Json::object());
  r.registered_at = doc.at("registeredAt").get<std::int64_t>();
  r.renewed_at = doc.at("renewedAt").get<std::int64_t>();
  r.expires_at = doc.at("expiresAt").get<std::int64_t>();
  r.status = agent_status_from_string(doc.at("status").get<std::string>());
  r.consecutive_challenge_failures = doc.value("consecutiveChallengeFailures", 0);
  return r;
}

Json ChallengeOutcome::to_json() const {
  Json out;
  out["agentUuid"] = agent_uuid;
  out["challengeId"] = challenge_id;
  out["expected"] = expected;
  out["received"] = received;
  out["confidence"] = confidence;
  out["passed"] = passed;
  out["at"] = at;
  return out;
}

Registry::Registry(std::unique_ptr<Store> store, CertificateAuthority ca, PrivateKey signing_key,
                   CertificateBundle signing_bundle, SchemaRegistry schemas, AdapterSet adapters,
                   std::shared_ptr<AuditLog> audit, Clock clock, RegistryConfig config)
    : store_(std::move(store)),
      ca_(std::move(ca)),
      signing_key_(std::move(signing_key)),
      signing_bundle_(std::move(signing_bundle)),
      schemas_(std::move(schemas)),
      adapters_(std::move(adapters)),
      audit_(std::move(audit)),
      clock_(std::move(clock)),
      config_(std::move(config)) {}

Registry Registry::create_ephemeral(const std::string& schema_dir, Clock clock,
                                    RegistryConfig config, KeyAlgorithm alg) {
  CertificateAuthority ca =
      CertificateAuthority::create_root(CertificateAuthority::Options{}, alg, clock);
  PrivateKey signing_key = PrivateKey::generate(alg);
  Csr csr = Csr::create(signing_key, DistinguishedName{"ans-registry", "service", "ANS"});
  CertificateBundle signing_bundle = ca.issue(csr, 3650, false);
  auto audit = std::make_shared<AuditLog>(fresh_temp_path("ans-audit", ".ndjson"), clock);
  return Registry(open_sqlite_store(":memory:"), std::move(ca), std::move(signing_key),
                  std::move(signing_bundle), SchemaRegistry::load(schema_dir),
                  AdapterSet::standard(), std::move(audit), std::move(clock), std::move(config));
}

Registry Registry::open(const std::string& dir, const std::string& schema_dir,
                        const std::string& ca_passphrase, Clock clock, RegistryConfig config,
                        KeyAlgorithm alg) {
  std::filesystem::create_directories(dir);
  std::string ca_dir = dir + "/ca";
  std::optional<CertificateAuthority> ca;
  if (CertificateAuthority::exists(ca_dir)) {
    ca = CertificateAuthority::load(ca_dir, ca_passphrase, clock);
  } else {
    ca = CertificateAuthority::create_root(CertificateAuthority::Options{}, alg, clock);
  }

  std::string key_path = dir + "/registry_key.pem";
  std::string cert_path = dir + "/registry_cert.pem";
  std::optional<PrivateKey> signing_key;
  std::optional<CertificateBundle> signing_bundle;
  if (std::filesystem::exists(key_path) && std::filesystem::exists(cert_path)) {
    signing_key = PrivateKey::load_pem_file(key_path, ca_passphrase);
    signing_bundle = CertificateBundle::from_pem(read_file(cert_path));
  } else {
    signing_key = PrivateKey::generate(alg);
    Csr csr = Csr::create(*signing_key, DistinguishedName{"ans-registry", "service", "ANS"});
    signing_bundle = ca->issue(csr, 3650, false);
    signing_key->save_pem_file(key_path, ca_passphrase);
    std::ofstream out(cert_path, std::ios::binary | std::ios::trunc);
    out << signing_bundle->to_pem();
  }
  ca->save(ca_dir, ca_passphrase);

  auto audit = std::make_shared<AuditLog>(dir + "/audit.ndjson", clock);
  return Registry(open_sqlite_store(dir + "/ans.db"), std::move(*ca), std::move(*signing_key),
                  std::move(*signing_bundle), SchemaRegistry::load(schema_dir),
                  AdapterSet::standard(), std::move(audit), std::move(clock), std::move(config));
}

std::string Registry::derive_agent_uuid(const PublicKey& pub) {
  return uuid_v5(ans_namespace_uuid(), sha256_hex(pub.to_der())).to_string();
}

std::string Registry::resolve_pem_ref(const std::string& value) const {
  if (value.rfind("vault:", 0) != 0) return value;
  if (config_.vault_dir.empty())
    throw AnsError(ErrorCode::ConfigError,
                   "request references " + value + " but no vault directory is configured");
  std::string name = value.substr(6);
  if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos)
    throw AnsError(ErrorCode::SchemaViolation, "malformed vault reference: " + value);
  return read_file(config_.vault_dir + "/" + name + ".pem");
}

void Registry::persist_locked(const AgentRecord& record, const std::string& op) {
  StoredAgent stored;
  stored.agent_uuid = record.agent_uuid;
  stored.protocol = record.name.scheme_string();
  stored.agent_id = record.name.agent_id;
  stored.capability = record.name.capability;
  stored.provider = record.name.provider;
  stored.version = record.name.version.to_string();
  stored.ans_name = record.name.to_string();
  stored.record_json = canonicalize(record.to_json());
  store_->put_agent(stored);
  audit_->append(op, record.agent_uuid, record_hash(record));
}

Json Registry::register_agent(const Json& request) {
  ValidationReport report = schemas_.validate(MessageKind::RegistrationRequest, request);
  if (!report.valid)
    throw AnsError(ErrorCode::SchemaViolation,
                   "registration request rejected: " + report.to_string());

  ANSName name = name_from_registration(request);
  const ProtocolAdapter& adapter = adapters_.get(name.protocol);

  std::vector<std::string> violations;
  if (!adapter.validate_registration(request, violations)) {
    std::string detail;
    for (const auto& v : violations) detail += (detail.empty() ? "" : "; ") + v;
    throw AnsError(ErrorCode::AdapterRejection, "adapter rejected registration: " + detail);
  }
  NormalizedMetadata metadata = adapter.parse_metadata(request.value("protocolExtensions",
                                                                     Json::object()));
  std::string endpoint = metadata.endpoint(name.protocol);
  if (endpoint.empty())
    throw AnsError(ErrorCode::AdapterRejection,
                   "adapter extracted no resolvable endpoint from protocolExtensions");

  std::string csr_pem = resolve_pem_ref(request.at("certificate").at("pem").get<std::string>());
  Csr csr = Csr::from_pem(csr_pem);
  if (!csr.self_signature_valid())
    throw AnsError(ErrorCode::InvalidCsr, "CSR self-signature verification failed");
  DistinguishedName want = DistinguishedName::for_agent(name);
  DistinguishedName got = csr.subject();
  if (got.common_name != want.common_name || got.organizational_unit != want.organizational_unit ||
      got.organization != want.organization)
    throw AnsError(ErrorCode::InvalidCsr, "CSR subject " + got.to_string() +
                                              " does not match the requested name (expected " +
                                              want.to_string() + ")");

  std::string agent_uuid = derive_agent_uuid(csr.public_key());

  std::lock_guard<std::mutex> lock(write_mu_);
  if (store_->find_exact(name.scheme_string(), name.agent_id, name.capability, name.provider,
                         name.version.to_string()))
    throw AnsError(ErrorCode::DuplicateName,
                   "name already registered: " + name.to_string());
  if (store_->get_agent(agent_uuid))
    throw AnsError(ErrorCode::DuplicateName,
                   "public key already bound to agent " + agent_uuid);

  CertificateBundle bundle = ca_.issue(csr, config_.cert_validity_days, false);

  AgentRecord record;
  record.name = name;
  record.agent_uuid = agent_uuid;
  record.certificate = bundle;
  record.endpoint = endpoint;
  record.protocol_extensions = request.value("protocolExtensions", Json::object());
  record.registered_at = to_unix_seconds(clock_());
  record.renewed_at = record.registered_at;
  record.expires_at = bundle.leaf().not_after_unix();
  record.status = AgentStatus::Active;
  persist_locked(record, "register");

  Json response;
  response["ansName"] = record.name.to_string();
  response["agentUuid"] = record.agent_uuid;
  response["certificate"] = certificate_object(bundle);
  response["registeredAt"] = record.registered_at;
  response["expiresAt"] = record.expires_at;
  response["status"] = "active";
  return response;
}

bool Registry::verify_proof(const AgentRecord& record, const Json& proof,
                            const std::string& purpose, const std::string& ans_name) const {
  if (!proof.is_object()) return false;
  auto alg_it = proof.find("algorithm");
  auto sig_it = proof.find("signature");
  auto nonce_it = proof.find("nonce");
  if (alg_it == proof.end() || sig_it == proof.end() || nonce_it == proof.end()) return false;
  if (!alg_it->is_string() || !sig_it->is_string() || !nonce_it->is_string()) return false;

  Signature sig;
  try {
    sig.algorithm = key_algorithm_from_string(alg_it->get<std::string>());
    sig.bytes = base64_decode(sig_it->get<std::string>());
  } catch (const std::exception&) {  // unknown algorithm or undecodable base64
    return false;
  }

  Json payload;
  payload["agentUuid"] = record.agent_uuid;
  payload["ansName"] = ans_name;
  payload["nonce"] = *nonce_it;
  payload["purpose"] = purpose;
  std::string data = canonicalize(payload);

  try {
    if (verify_signature(data, sig, record.certificate.leaf().public_key())) return true;
  } catch (const AnsError&) {
    // fall through to operator key
  }
  try {
    return verify_signature(data, sig, signing_public_key());
  } catch (const AnsError&) {
    return false;
  }
}

Json Registry::renew_agent(const Json& request) {
  ValidationReport report = schemas_.validate(MessageKind::RenewalRequest, request);
  if (!report.valid)
    throw AnsError(ErrorCode::SchemaViolation, "renewal request rejected: " + report.to_string());

  std::string agent_uuid = request.at("agentUuid").get<std::string>();
  std::string ans_name = request.at("ansName").get<std::string>();

  std::lock_guard<std::mutex> lock(write_mu_);
  AgentRecord record = require_agent_locked(agent_uuid);
  if (record.name.to_string() != ans_name)
    throw AnsError(ErrorCode::UnknownAgent,
                   "ansName does not match the record for " + agent_uuid);
  record = sweep_expiry(std::move(record));

  if (record.status == AgentStatus::Revoked || record.status == AgentStatus::Deregistered ||
      record.status == AgentStatus::Quarantined)
    throw AnsError(ErrorCode::RevokedAgent,
                   std::string("agent is ") + agent_status_name(record.status) +
                       " and cannot renew");

  if (!verify_proof(record, request.at("proof"), "renew", ans_name))
    throw AnsError(ErrorCode::BadProof, "renewal proof not signed by the agent's current key");

  Certificate old_leaf = record.certificate.leaf();
  CertificateBundle fresh = ca_.reissue(old_leaf, config_.cert_validity_days);
  ca_.revoke(old_leaf.serial());

  record.certificate = fresh;
  record.renewed_at = to_unix_seconds(clock_());
  record.expires_at = fresh.leaf().not_after_unix();
  record.status = AgentStatus::Active;
  persist_locked(record, "renew");

  Json response;
  response["ansName"] = record.name.to_string();
  response["agentUuid"] = record.agent_uuid;
  response["certificate"] = certificate_object(fresh);
  response["renewedAt"] = record.renewed_at;
  response["expiresAt"] = record.expires_at;
  response["status"] = "active";
  return response;
}

Json Registry::deregister_agent(const Json& request) {
  if (!request.is_object() || !request.contains("ansName") || !request.contains("agentUuid") ||
      !request.contains("proof"))
    throw AnsError(ErrorCode::SchemaViolation,
                   "deregistration requires ansName, agentUuid, and proof");
  std::string agent_uuid = request.at("agentUuid").get<std::string>();
  std::string ans_name = request.at("ansName").get<std::string>();

  std::lock_guard<std::mutex> lock(write_mu_);
  AgentRecord record = require_agent_locked(agent_uuid);
  if (record.name.to_string() != ans_name)
    throw AnsError(ErrorCode::UnknownAgent,
                   "ansName does not match the record for " + agent_uuid);

  if (!verify_proof(record, request.at("proof"), "deregister", ans_name))
    throw AnsError(ErrorCode::BadProof, "deregistration proof not signed by the agent's key");

  if (record.status != AgentStatus::Deregistered) {
    std::uint64_t serial = record.certificate.leaf().serial();
    RevocationList crl = ca_.current_crl();
    if (!crl.contains(serial)) ca_.revoke(serial);
    record.status = AgentStatus::Deregistered;
    persist_locked(record, "deregister");
  }

  Json ack;
  ack["ansName"] = record.name.to_string();
  ack["agentUuid"] = record.agent_uuid;
  ack["status"] = agent_status_name(record.status);
  return ack;
}

AgentRecord Registry::require_agent_locked(const std::string& agent_uuid) {
  auto stored = store_->get_agent(agent_uuid);
  if (!stored) throw AnsError(ErrorCode::UnknownAgent, "no agent with uuid " + agent_uuid);
  return AgentRecord::from_json(Json::parse(stored->record_json));
}

AgentRecord Registry::sweep_expiry(AgentRecord record) {
  if (record.status == AgentStatus::Active && record.expires_at <= to_unix_seconds(clock_())) {
    record.status = AgentStatus::Expired;
    persist_locked(record, "expire");
  }
  return record;
}

std::optional<AgentRecord> Registry::find_agent(const std::string& agent_uuid) {
  auto stored = store_->get_agent(agent_uuid);
  if (!stored) return std::nullopt;
  return AgentRecord::from_json(Json::parse(stored->record_json));
}

std::vector<AgentRecord> Registry::lookup(const std::string& protocol,
                                          const std::string& agent_id,
                                          const std::string& capability,
                                          const std::string& provider) {
  std::vector<AgentRecord> out;
  auto rows = store_->find_matching(protocol, agent_id, capability, provider);
  for (const auto& row : rows) {
    AgentRecord record = AgentRecord::from_json(Json::parse(row.record_json));
    if (record.status == AgentStatus::Active &&
        record.expires_at <= to_unix_seconds(clock_())) {
      std::lock_guard<std::mutex> lock(write_mu_);
      record = sweep_expiry(std::move(record));
    }
    if (record.status == AgentStatus::Active) out.push_back(std::move(record));
  }
  return out;
}

EndpointRecord Registry::get_agent_endpoint_record(const std::string& agent_uuid) {
  auto stored = store_->get_agent(agent_uuid);
  if (!stored) throw AnsError(ErrorCode::UnknownAgent, "no agent with uuid " + agent_uuid);
  AgentRecord record = AgentRecord::from_json(Json::parse(stored->record_json));
  if (record.status == AgentStatus::Active && record.expires_at <= to_unix_seconds(clock_())) {
    std::lock_guard<std::mutex> lock(write_mu_);
    record = sweep_expiry(std::move(record));
  }
  if (record.status != AgentStatus::Active)
    throw AnsError(ErrorCode::InactiveAgent,
                   std::string("agent is ") + agent_status_name(record.status));

  Json data;
  data["agentCertificate"] = record.certificate.to_pem();
  data["ansName"] = record.name.to_string();
  data["endpoint"] = record.endpoint;
  data["extensionsDigest"] = sha256_hex(canonicalize(record.protocol_extensions));
  data["issuedAt"] = to_unix_seconds(clock_());
  data["ttlSeconds"] = config_.ttl_seconds;

  EndpointRecord out;
  out.data = canonicalize(data);
  out.signature = sign(out.data, signing_key_);
  out.cert_pem = signing_bundle_.to_pem();
  return out;
}

ChallengeOutcome Registry::run_capability_challenge(const std::string& agent_uuid,
                                                    const Challenge& challenge,
                                                    ChallengeProbe& probe) {
  AgentRecord record;
  {
    std::lock_guard<std::mutex> lock(write_mu_);
    record = sweep_expiry(require_agent_locked(agent_uuid));
  }
  if (record.status != AgentStatus::Active)
    throw AnsError(ErrorCode::InactiveAgent,
                   std::string("agent is ") + agent_status_name(record.status) +
                       "; challenges require an active agent");

  auto [received, confidence] = probe.ask(record, challenge.input);

  ChallengeOutcome outcome;
  outcome.agent_uuid = agent_uuid;
  outcome.challenge_id = challenge.challenge_id;
  outcome.expected = challenge.expected;
  outcome.received = received;
  outcome.confidence = confidence;
  outcome.passed = (received == challenge.expected) && (confidence >= challenge.claimed_accuracy);
  outcome.at = to_unix_seconds(clock_());

  std::lock_guard<std::mutex> lock(write_mu_);
  store_->append_challenge(agent_uuid, canonicalize(outcome.to_json()));
  audit_->append("challenge", agent_uuid, sha256_hex(canonicalize(outcome.to_json())));

  record = require_agent_locked(agent_uuid);
  if (outcome.passed) {
    record.consecutive_challenge_failures = 0;
    persist_locked(record, "challenge-pass");
  } else {
    record.consecutive_challenge_failures += 1;
    if (record.consecutive_challenge_failures >= config_.quarantine_threshold &&
        record.status == AgentStatus::Active) {
      record.status = AgentStatus::Quarantined;
      persist_locked(record, "quarantine");
    } else {
      persist_locked(record, "challenge-fail");
    }
  }
  return outcome;
}

std::vector<std::string> Registry::challenge_history(const std::string& agent_uuid) {
  return store_->challenge_history(agent_uuid);
}

Json Registry::discovery_response(const std::string& agent_uuid) {
  auto record = find_agent(agent_uuid);
  if (!record) throw AnsError(ErrorCode::UnknownAgent, "no agent with uuid " + agent_uuid);
  const ProtocolAdapter& adapter = adapters_.get(record->name.protocol);
  DiscoveryInput input{record->name.to_string(), record->endpoint, record->protocol_extensions};
  return adapter.create_discovery_response(input);
}

std::string Registry::crl_pem() const { return ca_.crl_pem(); }

RevocationList Registry::current_crl() const { return ca_.current_crl(); }

RevocationList Registry::revoke_serial(std::uint64_t serial) {
  std::lock_guard<std::mutex> lock(write_mu_);
  RevocationList crl = ca_.revoke(serial);
  for (const auto& row : store_->all_agents()) {
    AgentRecord record = AgentRecord::from_json(Json::parse(row.record_json));
    if (record.status == AgentStatus::Active &&
        record.certificate.leaf().serial() == serial) {
      record.status = AgentStatus::Revoked;
      persist_locked(record, "revoke");
    }
  }
  return crl;
}

const PublicKey Registry::signing_public_key() const {
  return signing_bundle_.leaf().public_key();
}

}  // namespace ans
