#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "ans/service.hpp"

#include <openssl/ssl.h>
#include <openssl/x509.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <thread>
#include <utility>

namespace ans {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaViolation:
    case ErrorCode::NonFiniteNumber:
    case ErrorCode::UnknownKind:
    case ErrorCode::InvalidCsr:
    case ErrorCode::MalformedName:
    case ErrorCode::MalformedRange:
      return 400;
    case ErrorCode::BadProof:
      return 403;
    case ErrorCode::UnknownAgent:
    case ErrorCode::AgentNotFound:
    case ErrorCode::UnknownSerial:
      return 404;
    case ErrorCode::DuplicateName:
    case ErrorCode::IncompatibleVersion:
      return 409;
    case ErrorCode::RevokedAgent:
    case ErrorCode::InactiveAgent:
      return 410;
    case ErrorCode::AdapterRejection:
    case ErrorCode::UnknownProtocol:
    case ErrorCode::MissingRequiredKey:
    case ErrorCode::MalformedExtension:
    case ErrorCode::UnsupportedAlgorithm:
      return 422;
    case ErrorCode::RateLimited:
      return 429;
    case ErrorCode::ChallengeTimeout:
      return 504;
    default:
      return 500;
  }
}

Json error_envelope(ErrorCode code, const std::string& message,
                    const std::vector<std::string>& details) {
  Json env;
  env["code"] = error_code_name(code);
  env["message"] = message;
  env["details"] = Json::array();
  for (const auto& d : details) env["details"].push_back(d);
  return env;
}

namespace {

constexpr const char kJsonType[] = "application/json";

// Rate-limit identity: mTLS peer certificate subject when the connection has
// one, otherwise the source address.
std::string peer_identity(const httplib::Request& req) {
  if (req.ssl != nullptr) {
    X509* peer = SSL_get1_peer_certificate(const_cast<SSL*>(req.ssl));
    if (peer != nullptr) {
      char buf[512] = {0};
      X509_NAME_oneline(X509_get_subject_name(peer), buf, sizeof(buf) - 1);
      X509_free(peer);
      if (buf[0] != '\0') return buf;
    }
  }
  return req.remote_addr;
}

Json parse_body(const httplib::Request& req) {
  Json body = Json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw AnsError(ErrorCode::SchemaViolation, "request body is not a JSON object");
  return body;
}

// Best-effort capability for bucket scoping; garbage bodies share one bucket.
std::string capability_of(const Json& body) {
  auto it = body.find("agentCapability");
  if (it != body.end() && it->is_string()) return it->get<std::string>();
  it = body.find("ansName");
  if (it != body.end() && it->is_string()) {
    try {
      return ANSName::parse(it->get<std::string>()).capability;
    } catch (const AnsError&) {
    }
  }
  return "";
}

void fail(httplib::Response& res, ErrorCode code, const std::string& message,
          const std::vector<std::string>& details = {}) {
  res.status = http_status_for(code);
  res.set_content(error_envelope(code, message, details).dump(), kJsonType);
}

}  // namespace

struct Service::Impl {
  Registry& registry;
  ServiceConfig config;
  RateLimiter limiter;
  std::unique_ptr<httplib::Server> server;
  std::thread thread;
  std::atomic<int> bound_port{0};

  Impl(Registry& r, ServiceConfig c)
      : registry(r), config(std::move(c)), limiter(config.rate_limit, registry.clock()) {}

  using Body = std::function<Json(const Json&, httplib::Response&)>;

  // Shared endpoint plumbing: parse, rate-limit, optional schema check with
  // violation details, typed-error mapping.
  void json_endpoint(const httplib::Request& req, httplib::Response& res, int ok_status,
                     std::optional<MessageKind> kind, const Body& fn) {
    try {
      Json body = parse_body(req);
      if (!limiter.allow(peer_identity(req), capability_of(body)))
        throw AnsError(ErrorCode::RateLimited, "rate limit exceeded, retry later");
      if (kind) {
        ValidationReport report = registry.schemas().validate(*kind, body);
        if (!report.valid) {
          std::vector<std::string> details;
          for (const auto& v : report.violations) details.push_back(v.path + ": " + v.message);
          fail(res, ErrorCode::SchemaViolation, "request does not conform to its schema", details);
          return;
        }
      }
      Json out = fn(body, res);
      res.status = ok_status;
      res.set_content(out.dump(), kJsonType);
    } catch (const AnsError& e) {
      fail(res, e.code(), e.what());
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(error_envelope(ErrorCode::StoreError, e.what()).dump(), kJsonType);
    }
  }

  void route(httplib::Server& srv) {
    srv.Post("/v1/register", [this](const httplib::Request& req, httplib::Response& res) {
      json_endpoint(req, res, 201, MessageKind::RegistrationRequest,
                    [this](const Json& body, httplib::Response&) {
                      return registry.register_agent(body);
                    });
    });

    srv.Post("/v1/resolve", [this](const httplib::Request& req, httplib::Response& res) {
      json_endpoint(req, res, 200, MessageKind::CapabilityRequest,
                    [this](const Json& body, httplib::Response& r) {
                      ANSName name;
                      name.scheme = body.at("protocol").get<std::string>();
                      if (auto p = protocol_from_string(name.scheme)) name.protocol = *p;
                      name.agent_id = body.at("agentID").get<std::string>();
                      name.capability = body.at("agentCapability").get<std::string>();
                      name.provider = body.at("provider").get<std::string>();
                      InProcessTransport transport(registry);
                      Json wire =
                          transport.resolve_capability(name, body.at("version").get<std::string>());
                      std::int64_t ttl = wire.at("record").at("ttlSeconds").get<std::int64_t>();
                      r.set_header("Cache-Control", "max-age=" + std::to_string(ttl));
                      r.set_header("X-Ans-Ttl", std::to_string(ttl));
                      return wire;
                    });
    });

    srv.Post("/v1/renew", [this](const httplib::Request& req, httplib::Response& res) {
      json_endpoint(req, res, 200, MessageKind::RenewalRequest,
                    [this](const Json& body, httplib::Response&) {
                      return registry.renew_agent(body);
                    });
    });

    srv.Post("/v1/deregister", [this](const httplib::Request& req, httplib::Response& res) {
      json_endpoint(req, res, 200, std::nullopt, [this](const Json& body, httplib::Response&) {
        return registry.deregister_agent(body);
      });
    });

    srv.Get("/v1/crl", [this](const httplib::Request&, httplib::Response& res) {
      try {
        RevocationList crl = registry.current_crl();
        res.set_header("X-Ans-Crl-Next-Update", std::to_string(crl.next_update));
        res.status = 200;
        res.set_content(registry.crl_pem(), "application/x-pem-file");
      } catch (const AnsError& e) {
        fail(res, e.code(), e.what());
      }
    });

    srv.Get("/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
      Json health;
      health["status"] = "ok";
      try {
        registry.find_agent("00000000-0000-5000-8000-000000000000");
        health["store"] = "ok";
      } catch (const std::exception&) {
        health["status"] = "degraded";
        health["store"] = "unreachable";
      }
      try {
        registry.current_crl();
        health["ca"] = "ok";
      } catch (const std::exception&) {
        health["status"] = "degraded";
        health["ca"] = "unreachable";
      }
      res.status = health["status"] == "ok" ? 200 : 503;
      res.set_content(health.dump(), kJsonType);
    });
  }

  std::unique_ptr<httplib::Server> make_server() {
    if (config.dev_no_tls) return std::make_unique<httplib::Server>();
    if (config.tls_cert_path.empty() || config.tls_key_path.empty())
      throw AnsError(ErrorCode::ConfigError,
                     "TLS cert/key required; pass --dev-no-tls to run without TLS");
    for (const std::string& p : {config.tls_cert_path, config.tls_key_path})
      if (!std::filesystem::exists(p))
        throw AnsError(ErrorCode::ConfigError, "TLS file not found: " + p);
    auto ssl = std::make_unique<httplib::SSLServer>(
        config.tls_cert_path.c_str(), config.tls_key_path.c_str(),
        config.tls_client_ca_path.empty() ? nullptr : config.tls_client_ca_path.c_str());
    if (!ssl->is_valid())
      throw AnsError(ErrorCode::ConfigError, "could not load TLS cert/key");
    return ssl;
  }
};

Service::Service(Registry& registry, ServiceConfig config)
    : impl_(std::make_unique<Impl>(registry, std::move(config))) {}

Service::~Service() { stop(); }

int Service::start() {
  if (impl_->server) return impl_->bound_port.load();
  impl_->server = impl_->make_server();
  impl_->route(*impl_->server);

  int port = impl_->config.listen_port;
  if (port == 0) {
    port = impl_->server->bind_to_any_port(impl_->config.listen_host);
    if (port <= 0) {
      impl_->server.reset();
      throw AnsError(ErrorCode::ConfigError, "could not bind " + impl_->config.listen_host);
    }
  } else if (!impl_->server->bind_to_port(impl_->config.listen_host, port)) {
    impl_->server.reset();
    throw AnsError(ErrorCode::ConfigError, "could not bind " + impl_->config.listen_host + ":" +
                                               std::to_string(port));
  }
  impl_->bound_port.store(port);
  impl_->thread = std::thread([this] { impl_->server->listen_after_bind(); });
  impl_->server->wait_until_ready();
  return port;
}

void Service::stop() {
  if (!impl_ || !impl_->server) return;
  impl_->server->stop();  // stops accepting; worker pool drains before exit
  if (impl_->thread.joinable()) impl_->thread.join();
  impl_->server.reset();
  impl_->bound_port.store(0);
}

int Service::port() const { return impl_->bound_port.load(); }

bool Service::running() const { return impl_->server && impl_->server->is_running(); }

std::string Service::base_url() const {
  const char* scheme = impl_->config.dev_no_tls ? "http" : "https";
  return std::string(scheme) + "://" + impl_->config.listen_host + ":" +
         std::to_string(impl_->bound_port.load());
}

// ---------------------------------------------------------------------------
// HttpTransport

namespace {

std::unique_ptr<httplib::Client> make_client(const HttpTransport::Options& o) {
  auto cli = std::make_unique<httplib::Client>(o.base_url);
  if (!cli->is_valid())
    throw AnsError(ErrorCode::ConfigError, "bad registry URL: " + o.base_url);
  cli->set_connection_timeout(o.timeout_seconds, 0);
  cli->set_read_timeout(o.timeout_seconds, 0);
  if (!o.server_ca_path.empty()) {
    cli->set_ca_cert_path(o.server_ca_path);
    cli->enable_server_certificate_verification(true);
  }
  return cli;
}

ErrorCode code_from_envelope(const Json& env, int status) {
  if (env.is_object() && env.contains("code") && env.at("code").is_string()) {
    const std::string name = env.at("code").get<std::string>();
    for (ErrorCode c : {ErrorCode::AgentNotFound, ErrorCode::UnknownAgent,
                        ErrorCode::IncompatibleVersion, ErrorCode::MalformedRange,
                        ErrorCode::MalformedName, ErrorCode::SchemaViolation,
                        ErrorCode::DuplicateName, ErrorCode::BadProof, ErrorCode::RevokedAgent,
                        ErrorCode::AdapterRejection, ErrorCode::UnknownProtocol,
                        ErrorCode::InvalidCsr, ErrorCode::RateLimited})
      if (name == error_code_name(c)) return c;
  }
  switch (status) {
    case 404: return ErrorCode::AgentNotFound;
    case 409: return ErrorCode::IncompatibleVersion;
    case 429: return ErrorCode::RateLimited;
    default: return ErrorCode::TransportError;
  }
}

[[noreturn]] void throw_from_response(const httplib::Result& result) {
  if (!result)
    throw AnsError(ErrorCode::TransportError,
                   "registry unreachable: " + httplib::to_string(result.error()));
  Json env = Json::parse(result->body, nullptr, false);
  std::string message = "registry returned HTTP " + std::to_string(result->status);
  if (env.is_object() && env.contains("message") && env.at("message").is_string())
    message = env.at("message").get<std::string>();
  throw AnsError(code_from_envelope(env, result->status), message);
}

}  // namespace

HttpTransport::HttpTransport(Options options) : options_(std::move(options)) {}

Json HttpTransport::post_json(const std::string& path, const Json& body) {
  auto cli = make_client(options_);
  httplib::Result result = cli->Post(path, body.dump(), kJsonType);
  if (!result || result->status < 200 || result->status >= 300) throw_from_response(result);
  Json parsed = Json::parse(result->body, nullptr, false);
  if (parsed.is_discarded())
    throw AnsError(ErrorCode::TransportError, "registry response is not JSON");
  return parsed;
}

Json HttpTransport::resolve_capability(const ANSName& name, const std::string& range) {
  Json body;
  body["requestType"] = "resolve";
  body["protocol"] = name.scheme_string();
  body["agentID"] = name.agent_id;
  body["agentCapability"] = name.capability;
  body["provider"] = name.provider;
  body["version"] = range;
  if (name.extension) body["extension"] = *name.extension;
  return post_json("/v1/resolve", body);
}

std::string HttpTransport::fetch_crl() {
  auto cli = make_client(options_);
  httplib::Result result = cli->Get("/v1/crl");
  if (!result)
    throw AnsError(ErrorCode::TransportError,
                   "registry unreachable: " + httplib::to_string(result.error()));
  if (result->status != 200)
    throw AnsError(ErrorCode::TransportError,
                   "CRL fetch returned HTTP " + std::to_string(result->status));
  return result->body;
}

}  // namespace ans
