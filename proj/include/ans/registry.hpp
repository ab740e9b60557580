#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ans/adapters.hpp"
#include "ans/ansname.hpp"
#include "ans/audit_log.hpp"
#include "ans/clock.hpp"
#include "ans/json_canon.hpp"
#include "ans/pki.hpp"
#include "ans/schema_registry.hpp"
#include "ans/store.hpp"
#include "ans/uuid_v5.hpp"

namespace ans {

enum class AgentStatus { Active, Expired, Revoked, Deregistered, Quarantined };
const char* agent_status_name(AgentStatus s);
AgentStatus agent_status_from_string(const std::string& s);

struct AgentRecord {
  ANSName name;
  std::string agent_uuid;
  CertificateBundle certificate;
  std::string endpoint;
  Json protocol_extensions = Json::object();
  std::int64_t registered_at = 0;
  std::int64_t renewed_at = 0;
  std::int64_t expires_at = 0;
  AgentStatus status = AgentStatus::Active;
  int consecutive_challenge_failures = 0;

  Json to_json() const;
  static AgentRecord from_json(const Json& doc);
};

// The triple a resolver verifies: canonical data bytes, registry signature
// over them, and the registry's certificate bundle.
struct EndpointRecord {
  std::string data;  // canonical JSON bytes of the signed payload
  Signature signature;
  std::string cert_pem;

  Json data_json() const { return Json::parse(data); }
};

struct Challenge {
  std::string challenge_id;
  std::string input;
  std::string expected;
  double claimed_accuracy = 1.0;
};

struct ChallengeOutcome {
  std::string agent_uuid;
  std::string challenge_id;
  std::string expected;
  std::string received;
  double confidence = 0.0;
  bool passed = false;
  std::int64_t at = 0;

  Json to_json() const;
};

// How the registry reaches a claimed agent during capability validation.
// Production probes speak the agent's own protocol; tests inject stubs.
class ChallengeProbe {
 public:
  virtual ~ChallengeProbe() = default;
  // (received answer, confidence in [0,1]); throws AnsError(ChallengeTimeout)
  // when the agent cannot be reached in time.
  virtual std::pair<std::string, double> ask(const AgentRecord& agent,
                                             const std::string& input) = 0;
};

struct RegistryConfig {
  int cert_validity_days = 90;
  std::int64_t ttl_seconds = 300;
  int quarantine_threshold = 3;  // consecutive challenge failures
  std::string vault_dir;         // resolves "vault:" PEM references when set
};

// Authoritative lifecycle manager: registration (RA checks + CA issuance),
// renewal, deregistration/revocation, signed EndpointRecord production,
// UUID derivation, and capability challenges. Reads run concurrently;
// mutations serialize on one writer lock; the audit log chains every
// mutation.
class Registry {
 public:
  Registry(std::unique_ptr<Store> store, CertificateAuthority ca, PrivateKey signing_key,
           CertificateBundle signing_bundle, SchemaRegistry schemas, AdapterSet adapters,
           std::shared_ptr<AuditLog> audit, Clock clock, RegistryConfig config);

  // Fresh root CA + registry signing identity + in-memory store; the usual
  // test-harness construction.
  static Registry create_ephemeral(const std::string& schema_dir, Clock clock,
                                   RegistryConfig config = {},
                                   KeyAlgorithm alg = KeyAlgorithm::Ed25519);
  // Durable construction rooted at dir (store, CA state, audit log).
  static Registry open(const std::string& dir, const std::string& schema_dir,
                       const std::string& ca_passphrase, Clock clock, RegistryConfig config = {},
                       KeyAlgorithm alg = KeyAlgorithm::Ed25519);

  Json register_agent(const Json& request);   // RegistrationResponse document
  Json renew_agent(const Json& request);      // RenewalResponse document
  Json deregister_agent(const Json& request); // {ansName, agentUuid, status} ack

  std::vector<AgentRecord> lookup(const std::string& protocol, const std::string& agent_id,
                                  const std::string& capability, const std::string& provider);
  EndpointRecord get_agent_endpoint_record(const std::string& agent_uuid);
  ChallengeOutcome run_capability_challenge(const std::string& agent_uuid,
                                            const Challenge& challenge, ChallengeProbe& probe);
  Json discovery_response(const std::string& agent_uuid);

  static std::string derive_agent_uuid(const PublicKey& pub);
  std::optional<AgentRecord> find_agent(const std::string& agent_uuid);
  std::vector<std::string> challenge_history(const std::string& agent_uuid);

  std::string crl_pem() const;
  RevocationList current_crl() const;
  RevocationList revoke_serial(std::uint64_t serial);  // operator action

  const CertificateBundle& signing_bundle() const { return signing_bundle_; }
  const PublicKey signing_public_key() const;
  const Certificate& trust_anchor() const { return ca_.certificate(); }
  CertificateAuthority& ca() { return ca_; }
  const SchemaRegistry& schemas() const { return schemas_; }
  const AdapterSet& adapters() const { return adapters_; }
  const RegistryConfig& config() const { return config_; }
  Clock clock() const { return clock_; }

 private:
  AgentRecord require_agent_locked(const std::string& agent_uuid);
  void persist_locked(const AgentRecord& record, const std::string& op);
  // flips active records past expiry; returns the refreshed record
  AgentRecord sweep_expiry(AgentRecord record);
  std::string resolve_pem_ref(const std::string& value) const;
  bool verify_proof(const AgentRecord& record, const Json& proof, const std::string& purpose,
                    const std::string& ans_name) const;

  std::unique_ptr<Store> store_;
  CertificateAuthority ca_;
  PrivateKey signing_key_;
  CertificateBundle signing_bundle_;
  SchemaRegistry schemas_;
  AdapterSet adapters_;
  std::shared_ptr<AuditLog> audit_;
  Clock clock_;
  RegistryConfig config_;
  std::mutex write_mu_;
};

}  // namespace ans
