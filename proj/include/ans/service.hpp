#pragma once

#include <memory>
#include <string>

#include "ans/errors.hpp"
#include "ans/json_canon.hpp"
#include "ans/rate_limit.hpp"
#include "ans/registry.hpp"
#include "ans/resolver.hpp"

namespace ans {

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 0;  // 0 = pick a free port

  // TLS is mandatory unless dev_no_tls is set explicitly; startup without
  // cert/key paths fails otherwise.
  std::string tls_cert_path;
  std::string tls_key_path;
  std::string tls_client_ca_path;  // when set, peers must present client certs
  bool dev_no_tls = false;

  std::int64_t default_ttl_seconds = 300;
  RateLimitConfig rate_limit;
};

// HTTP status for a typed error. Anything unrecognized maps to 500.
int http_status_for(ErrorCode code);

// Fixed error payload shape: {"code", "message", "details": [...]}.
Json error_envelope(ErrorCode code, const std::string& message,
                    const std::vector<std::string>& details = {});

// HTTP/JSON front end over a Registry:
//   POST /v1/register    RegistrationRequest  -> 201 RegistrationResponse
//   POST /v1/resolve     CapabilityRequest    -> 200 CapabilityResponse (+TTL header)
//   POST /v1/renew       RenewalRequest       -> 200 RenewalResponse
//   POST /v1/deregister  {ansName, agentUuid, proof} -> 200 ack
//   GET  /v1/crl                              -> 200 CRL PEM (+next-update header)
//   GET  /v1/healthz                          -> 200 {"status":"ok", ...}
// Rate limiting keys on the TLS peer certificate subject when present, else
// the source address; per-capability buckets per RateLimitConfig.
class Service {
 public:
  Service(Registry& registry, ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Bind and serve on a background thread; returns the bound port.
  // Throws AnsError(ConfigError) when TLS material is missing or the bind fails.
  int start();
  // Stop accepting, drain in-flight requests, join the server thread.
  void stop();
  int port() const;
  bool running() const;

  std::string base_url() const;  // http(s)://host:port

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// RegistryTransport over the HTTP API; the client-side half of Service.
// Maps error envelopes back to typed errors so Resolver sees the same
// exceptions as with InProcessTransport.
class HttpTransport final : public RegistryTransport {
 public:
  struct Options {
    std::string base_url;          // e.g. "https://127.0.0.1:8443"
    std::string server_ca_path;    // trust anchor for the TLS connection
    std::string client_cert_path;  // optional mTLS identity
    std::string client_key_path;
    int timeout_seconds = 10;
  };

  explicit HttpTransport(Options options);

  Json resolve_capability(const ANSName& name, const std::string& range) override;
  std::string fetch_crl() override;

  // Raw API calls used by the CLI verbs.
  Json post_json(const std::string& path, const Json& body);

 private:
  Options options_;
};

}  // namespace ans
