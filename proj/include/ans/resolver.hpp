#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ans/ansname.hpp"
#include "ans/clock.hpp"
#include "ans/json_canon.hpp"
#include "ans/pki.hpp"
#include "ans/registry.hpp"
#include "ans/semver.hpp"

namespace ans {

// Index of the highest candidate satisfying the range (candidates need not be
// sorted); nullopt when nothing satisfies it.
std::optional<std::size_t> negotiate_version(const std::vector<SemVer>& candidates,
                                             const VersionRange& range);

// Wire shape of a capability response: {Endpoint, signature, cert} per the
// response schema, plus "record", the signed payload object whose canonical
// bytes the signature covers.
Json endpoint_record_to_wire(const EndpointRecord& record);

// How the resolver reaches a registry. Implementations: in-process (wraps a
// Registry, used by tests and the embedded path) and HTTP (see service
// module). Either negotiates server-side; the resolver independently
// re-checks the returned version against the requested range.
class RegistryTransport {
 public:
  virtual ~RegistryTransport() = default;
  // Wire capability response for the best version match. Throws
  // AnsError(AgentNotFound | IncompatibleVersion | TransportError | RateLimited).
  virtual Json resolve_capability(const ANSName& name, const std::string& range) = 0;
  virtual std::string fetch_crl() = 0;  // CRL PEM; throws TransportError
};

class InProcessTransport final : public RegistryTransport {
 public:
  explicit InProcessTransport(Registry& registry) : registry_(registry) {}
  Json resolve_capability(const ANSName& name, const std::string& range) override;
  std::string fetch_crl() override;

 private:
  Registry& registry_;
};

struct ResolvedEndpoint {
  std::string endpoint;
  CertificateBundle agent_certificate;
  std::string ans_name;  // canonical, carries the negotiated version
  SemVer negotiated_version;
  std::int64_t verified_at = 0;
  std::int64_t expires_at = 0;  // verified_at + record ttl
};

struct VerifyOutcome {
  bool ok = false;
  std::string reason;  // "InvalidSignature", chain status name, or a consistency note
};

// Full record verification: signature over canonical record bytes by the key
// in the bundled certificate, signer and embedded agent certificate chains to
// the trust anchor with CRL checks, and Endpoint/record consistency. Pure;
// never throws.
VerifyOutcome verify_agent_endpoint_record(const Json& wire, const Certificate& trusted_ca,
                                           const RevocationList& crl,
                                           std::chrono::system_clock::time_point at);

// Verifying resolver with a TTL cache. Fail-closed: no endpoint is returned
// unless the record verified against the configured trust anchor and a
// current CRL. Negative results are never cached. Thread-safe; concurrent
// misses on one key collapse into a single fetch.
class Resolver {
 public:
  struct Options {
    // Re-fetch the CRL once half its validity window has elapsed.
    bool refresh_crl = true;
  };

  Resolver(std::shared_ptr<RegistryTransport> transport, Certificate trust_anchor, Clock clock);
  Resolver(std::shared_ptr<RegistryTransport> transport, Certificate trust_anchor, Clock clock,
           Options options);

  // Errors: MalformedName, MalformedRange, AgentNotFound, IncompatibleVersion,
  // InvalidEndpoint (verification failure, tampered or stale record),
  // TransportError, RateLimited.
  ResolvedEndpoint resolve(const std::string& name, const std::string& range);

  std::uint64_t fetch_count() const { return fetches_.load(); }
  std::uint64_t crl_fetch_count() const { return crl_fetches_.load(); }

  // Cache inspection (tests): entry for (name-tuple, range) if still fresh.
  std::optional<ResolvedEndpoint> cache_peek(const std::string& name, const std::string& range);

 private:
  std::string tuple_key(const ANSName& name) const;
  void ensure_crl_locked();
  std::shared_ptr<std::mutex> flight_for(const std::string& key);

  std::shared_ptr<RegistryTransport> transport_;
  Certificate trust_anchor_;
  Clock clock_;
  Options options_;

  std::mutex mu_;  // guards caches, memo, CRL state
  std::map<std::string, ResolvedEndpoint> cache_;        // tuple + version -> entry
  std::map<std::string, std::string> range_memo_;        // tuple + raw range -> version
  std::map<std::string, std::shared_ptr<std::mutex>> flights_;
  RevocationList crl_;
  bool crl_loaded_ = false;
  std::int64_t crl_fetched_at_ = 0;

  std::atomic<std::uint64_t> fetches_{0};
  std::atomic<std::uint64_t> crl_fetches_{0};
};

}  // namespace ans
