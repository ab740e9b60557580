// ans: registry service and client in one binary.
//
//   serve      run the registry HTTP service
//   keygen     generate an agent keypair
//   register   CSR + registration request against a running registry
//   renew      proof-signed certificate renewal
//   resolve    verified capability resolution (fail-closed)
//   revoke     agent-initiated deregistration, or operator revoke by serial
//   crl        fetch the current CRL
//   challenge  run a capability challenge against a registered agent
//
// Exit codes: 0 ok, 1 usage/config, 2 schema or request shape,
// 3 network, 4 verification failure, 5 not found.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "ans/ansname.hpp"
#include "ans/errors.hpp"
#include "ans/json_canon.hpp"
#include "ans/pki.hpp"
#include "ans/registry.hpp"
#include "ans/resolver.hpp"
#include "ans/service.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kSchema = 2;
constexpr int kNetwork = 3;
constexpr int kVerification = 4;
constexpr int kNotFound = 5;

int exit_code_for(ans::ErrorCode code) {
  using ans::ErrorCode;
  switch (code) {
    case ErrorCode::SchemaViolation:
    case ErrorCode::NonFiniteNumber:
    case ErrorCode::UnknownKind:
    case ErrorCode::MalformedName:
    case ErrorCode::MalformedRange:
    case ErrorCode::UnknownProtocol:
    case ErrorCode::UnsupportedAlgorithm:
    case ErrorCode::InvalidCsr:
    case ErrorCode::AdapterRejection:
    case ErrorCode::MissingRequiredKey:
    case ErrorCode::MalformedExtension:
    case ErrorCode::DuplicateName:
    case ErrorCode::IncompatibleVersion:
      return kSchema;
    case ErrorCode::TransportError:
    case ErrorCode::RateLimited:
    case ErrorCode::ChallengeTimeout:
      return kNetwork;
    case ErrorCode::InvalidEndpoint:
    case ErrorCode::BadProof:
    case ErrorCode::RevokedAgent:
    case ErrorCode::InactiveAgent:
      return kVerification;
    case ErrorCode::AgentNotFound:
    case ErrorCode::UnknownAgent:
    case ErrorCode::UnknownSerial:
      return kNotFound;
    default:
      return kUsage;
  }
}

std::string passphrase_from_env() {
  const char* p = std::getenv("ANS_KEY_PASSPHRASE");
  return p ? p : "";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ans::AnsError(ans::ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ans::AnsError(ans::ErrorCode::ConfigError, "cannot write " + path);
  out << content;
}

std::string random_nonce() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  std::ostringstream ss;
  ss << std::hex << dist(rd) << dist(rd);
  return ss.str();
}

void print_json(const ans::Json& doc) { std::cout << doc.dump(2) << "\n"; }

ans::HttpTransport::Options transport_options(const std::string& registry_url,
                                              const std::string& tls_ca) {
  ans::HttpTransport::Options o;
  o.base_url = registry_url;
  o.server_ca_path = tls_ca;
  return o;
}

ans::Json proof_object(const ans::PrivateKey& key, const std::string& agent_uuid,
                       const std::string& ans_name, const std::string& purpose) {
  ans::Json payload;
  payload["agentUuid"] = agent_uuid;
  payload["ansName"] = ans_name;
  std::string nonce = random_nonce();
  payload["nonce"] = nonce;
  payload["purpose"] = purpose;
  ans::Signature sig = ans::sign(ans::canonicalize(payload), key);

  ans::Json proof;
  proof["algorithm"] = ans::key_algorithm_name(sig.algorithm);
  proof["signature"] = ans::base64_encode(sig.bytes);
  proof["nonce"] = nonce;
  return proof;
}

// serve ----------------------------------------------------------------------

struct ServeArgs {
  std::string store_dir;
  std::string schema_dir = "schemas";
  std::string listen = "127.0.0.1:0";
  std::string tls_cert, tls_key, client_ca, vault_dir;
  bool dev_no_tls = false;
  std::int64_t ttl = 300;
  int validity_days = 90;
  std::string alg = "ed25519";
};

int run_serve(const ServeArgs& a) {
  auto colon = a.listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "--listen must be host:port\n";
    return kUsage;
  }
  ans::ServiceConfig cfg;
  cfg.listen_host = a.listen.substr(0, colon);
  cfg.listen_port = std::stoi(a.listen.substr(colon + 1));
  cfg.tls_cert_path = a.tls_cert;
  cfg.tls_key_path = a.tls_key;
  cfg.tls_client_ca_path = a.client_ca;
  cfg.dev_no_tls = a.dev_no_tls;
  cfg.default_ttl_seconds = a.ttl;

  ans::RegistryConfig rcfg;
  rcfg.ttl_seconds = a.ttl;
  rcfg.cert_validity_days = a.validity_days;
  rcfg.vault_dir = a.vault_dir;

  ans::Registry registry =
      ans::Registry::open(a.store_dir, a.schema_dir, passphrase_from_env(), ans::system_clock(),
                          rcfg, ans::key_algorithm_from_string(a.alg));
  ans::Service service(registry, cfg);
  int port = service.start();

  write_file(a.store_dir + "/trust_anchor.pem", registry.trust_anchor().pem());
  ans::Json banner;
  banner["listening"] = service.base_url();
  banner["port"] = port;
  banner["trustAnchor"] = a.store_dir + "/trust_anchor.pem";
  print_json(banner);

  static std::atomic<bool> stop_requested{false};
  std::signal(SIGINT, [](int) { stop_requested.store(true); });
  std::signal(SIGTERM, [](int) { stop_requested.store(true); });
  while (!stop_requested.load() && service.running())
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  service.stop();
  return kOk;
}

// keygen ---------------------------------------------------------------------

int run_keygen(const std::string& alg, const std::string& out_prefix) {
  ans::PrivateKey key = ans::PrivateKey::generate(alg);
  std::string key_path = out_prefix + ".key";
  std::string pub_path = out_prefix + ".pub";
  key.save_pem_file(key_path, passphrase_from_env());
  write_file(pub_path, key.public_key_pem());

  ans::Json out;
  out["algorithm"] = ans::key_algorithm_name(key.algorithm());
  out["keyFile"] = key_path;
  out["publicKeyFile"] = pub_path;
  out["agentUuid"] =
      ans::Registry::derive_agent_uuid(ans::PublicKey::from_pem(key.public_key_pem()));
  print_json(out);
  return kOk;
}

// register -------------------------------------------------------------------

int run_register(const std::string& registry_url, const std::string& tls_ca,
                 const std::string& name_text, const std::string& endpoint,
                 const std::string& key_path, const std::string& extensions_path) {
  ans::ANSName name = ans::ANSName::parse(name_text);
  ans::PrivateKey key = ans::PrivateKey::load_pem_file(key_path, passphrase_from_env());
  ans::Csr csr = ans::Csr::create(key, ans::DistinguishedName::for_agent(name));

  ans::Json extensions = ans::Json::object();
  if (!extensions_path.empty()) extensions = ans::Json::parse(read_file(extensions_path));
  if (!endpoint.empty()) {
    switch (name.protocol) {
      case ans::Protocol::Mcp:
        extensions["mcpEndpoint"] = endpoint;
        break;
      case ans::Protocol::A2a:
        if (!extensions.contains("agentCard")) extensions["agentCard"] = ans::Json::object();
        extensions["agentCard"]["endpoint"] = endpoint;
        break;
      default:
        if (!extensions.contains("profile")) extensions["profile"] = ans::Json::object();
        extensions["profile"]["endpoint"] = endpoint;
        break;
    }
  }

  ans::Json request;
  request["protocol"] = name.scheme_string();
  request["agentID"] = name.agent_id;
  request["agentCapability"] = name.capability;
  request["provider"] = name.provider;
  request["version"] = name.version.to_string();
  if (name.extension) request["extension"] = *name.extension;
  ans::Json cert;
  cert["subject"] = ans::DistinguishedName::for_agent(name).to_string();
  cert["issuer"] = "";
  cert["pem"] = csr.pem();
  request["certificate"] = cert;
  request["protocolExtensions"] = extensions;

  ans::HttpTransport transport(transport_options(registry_url, tls_ca));
  print_json(transport.post_json("/v1/register", request));
  return kOk;
}

// renew / revoke -------------------------------------------------------------

int run_renew(const std::string& registry_url, const std::string& tls_ca,
              const std::string& name_text, const std::string& agent_uuid,
              const std::string& key_path) {
  ans::PrivateKey key = ans::PrivateKey::load_pem_file(key_path, passphrase_from_env());
  ans::Json request;
  request["ansName"] = name_text;
  request["agentUuid"] = agent_uuid;
  request["proof"] = proof_object(key, agent_uuid, name_text, "renew");

  ans::HttpTransport transport(transport_options(registry_url, tls_ca));
  print_json(transport.post_json("/v1/renew", request));
  return kOk;
}

int run_revoke(const std::string& registry_url, const std::string& tls_ca,
               const std::string& name_text, const std::string& agent_uuid,
               const std::string& key_path, const std::string& store_dir,
               const std::string& schema_dir, std::uint64_t serial) {
  if (!store_dir.empty()) {  // operator path: revoke by serial against the local CA
    ans::Registry registry = ans::Registry::open(store_dir, schema_dir, passphrase_from_env(),
                                                 ans::system_clock());
    registry.revoke_serial(serial);
    ans::Json out;
    out["revokedSerial"] = serial;
    out["crl"] = registry.crl_pem();
    print_json(out);
    return kOk;
  }
  if (name_text.empty() || agent_uuid.empty() || key_path.empty())
    throw ans::AnsError(ans::ErrorCode::ConfigError,
                        "revoke needs --name/--uuid/--key, or --store/--serial in operator mode");
  ans::PrivateKey key = ans::PrivateKey::load_pem_file(key_path, passphrase_from_env());
  ans::Json request;
  request["ansName"] = name_text;
  request["agentUuid"] = agent_uuid;
  request["proof"] = proof_object(key, agent_uuid, name_text, "deregister");

  ans::HttpTransport transport(transport_options(registry_url, tls_ca));
  print_json(transport.post_json("/v1/deregister", request));
  return kOk;
}

// resolve --------------------------------------------------------------------

int run_resolve(const std::string& registry_url, const std::string& tls_ca,
                const std::string& trust_anchor_path, const std::string& name_text,
                const std::string& range) {
  ans::Certificate anchor = ans::Certificate::from_pem(read_file(trust_anchor_path));
  auto transport = std::make_shared<ans::HttpTransport>(transport_options(registry_url, tls_ca));
  ans::Resolver resolver(transport, anchor, ans::system_clock());
  ans::ResolvedEndpoint ep = resolver.resolve(name_text, range);

  ans::Json out;
  out["ansName"] = ep.ans_name;
  out["endpoint"] = ep.endpoint;
  out["negotiatedVersion"] = ep.negotiated_version.to_string();
  out["verifiedAt"] = ep.verified_at;
  out["expiresAt"] = ep.expires_at;
  out["agentCertificateSubject"] = ep.agent_certificate.leaf().subject();
  print_json(out);
  return kOk;
}

// crl ------------------------------------------------------------------------

int run_crl(const std::string& registry_url, const std::string& tls_ca, const std::string& out) {
  ans::HttpTransport transport(transport_options(registry_url, tls_ca));
  std::string pem = transport.fetch_crl();
  if (out.empty())
    std::cout << pem;
  else
    write_file(out, pem);
  return kOk;
}

// challenge ------------------------------------------------------------------

// POSTs {"input": ...} to the agent's endpoint and expects {"output": ...}.
// --simulate-answer bypasses the network for desk runs.
class HttpProbe final : public ans::ChallengeProbe {
 public:
  explicit HttpProbe(std::string simulated) : simulated_(std::move(simulated)) {}

  std::pair<std::string, double> ask(const ans::AgentRecord& agent,
                                     const std::string& input) override {
    if (!simulated_.empty()) return {simulated_, 1.0};
    ans::HttpTransport transport(transport_options(agent.endpoint, ""));
    ans::Json body;
    body["input"] = input;
    try {
      ans::Json reply = transport.post_json("/challenge", body);
      return {reply.value("output", ""), reply.value("confidence", 1.0)};
    } catch (const ans::AnsError&) {
      throw ans::AnsError(ans::ErrorCode::ChallengeTimeout,
                          "agent endpoint unreachable: " + agent.endpoint);
    }
  }

 private:
  std::string simulated_;
};

int run_challenge(const std::string& store_dir, const std::string& schema_dir,
                  const std::string& agent_uuid, const std::string& input,
                  const std::string& expected, const std::string& simulated) {
  ans::Registry registry =
      ans::Registry::open(store_dir, schema_dir, passphrase_from_env(), ans::system_clock());
  ans::Challenge challenge;
  challenge.challenge_id = random_nonce();
  challenge.input = input;
  challenge.expected = expected;
  HttpProbe probe(simulated);
  ans::ChallengeOutcome outcome = registry.run_capability_challenge(agent_uuid, challenge, probe);
  print_json(outcome.to_json());
  return outcome.passed ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent Name Service registry and client"};
  app.require_subcommand(1);

  // serve
  ServeArgs serve_args;
  CLI::App* serve = app.add_subcommand("serve", "run the registry service");
  serve->set_config("--config");
  serve->add_option("--store", serve_args.store_dir, "state directory")->required();
  serve->add_option("--schemas", serve_args.schema_dir, "schema directory");
  serve->add_option("--listen", serve_args.listen, "host:port (port 0 picks one)");
  serve->add_option("--tls-cert", serve_args.tls_cert, "server certificate PEM");
  serve->add_option("--tls-key", serve_args.tls_key, "server private key PEM");
  serve->add_option("--client-ca", serve_args.client_ca, "require client certs from this CA");
  serve->add_flag("--dev-no-tls", serve_args.dev_no_tls, "plain HTTP (testing only)");
  serve->add_option("--ttl", serve_args.ttl, "endpoint record TTL seconds");
  serve->add_option("--validity-days", serve_args.validity_days, "agent cert validity");
  serve->add_option("--vault-dir", serve_args.vault_dir, "directory for vault: PEM references");
  serve->add_option("--alg", serve_args.alg, "ed25519 | ecdsa-p256-sha256");

  // keygen
  std::string kg_alg = "ed25519", kg_out = "agent";
  CLI::App* keygen = app.add_subcommand("keygen", "generate an agent keypair");
  keygen->add_option("--alg", kg_alg, "ed25519 | ecdsa-p256-sha256");
  keygen->add_option("--out", kg_out, "output prefix (writes PREFIX.key, PREFIX.pub)");

  // shared client flags
  std::string registry_url = "http://127.0.0.1:8023";
  std::string tls_ca, trust_anchor;

  // register
  std::string reg_name, reg_endpoint, reg_key, reg_ext;
  CLI::App* reg = app.add_subcommand("register", "register an agent");
  reg->add_option("--registry", registry_url, "registry base URL");
  reg->add_option("--tls-ca", tls_ca, "CA PEM for the TLS connection");
  reg->add_option("--name", reg_name, "full agent name")->required();
  reg->add_option("--endpoint", reg_endpoint, "agent endpoint URL");
  reg->add_option("--key", reg_key, "agent private key PEM")->required();
  reg->add_option("--extensions", reg_ext, "protocolExtensions JSON file");

  // renew
  std::string rn_name, rn_uuid, rn_key;
  CLI::App* renew = app.add_subcommand("renew", "renew an agent certificate");
  renew->add_option("--registry", registry_url, "registry base URL");
  renew->add_option("--tls-ca", tls_ca, "CA PEM for the TLS connection");
  renew->add_option("--name", rn_name, "full agent name")->required();
  renew->add_option("--uuid", rn_uuid, "agent UUID")->required();
  renew->add_option("--key", rn_key, "agent private key PEM")->required();

  // resolve
  std::string rs_name, rs_range = "*";
  CLI::App* resolve = app.add_subcommand("resolve", "resolve and verify an endpoint");
  resolve->add_option("name", rs_name, "agent name (version label ignored for ranges)")
      ->required();
  resolve->add_option("--range", rs_range, "version range (*, 1.2.3, ^1.2.3, ~1.2, cmp sets)");
  resolve->add_option("--registry", registry_url, "registry base URL");
  resolve->add_option("--tls-ca", tls_ca, "CA PEM for the TLS connection");
  resolve->add_option("--trust-anchor", trust_anchor, "registry CA PEM")->required();

  // revoke
  std::string rv_name, rv_uuid, rv_key, rv_store, rv_schemas = "schemas";
  std::uint64_t rv_serial = 0;
  CLI::App* revoke = app.add_subcommand("revoke", "deregister an agent or revoke a serial");
  revoke->add_option("--registry", registry_url, "registry base URL");
  revoke->add_option("--tls-ca", tls_ca, "CA PEM for the TLS connection");
  revoke->add_option("--name", rv_name, "full agent name");
  revoke->add_option("--uuid", rv_uuid, "agent UUID");
  revoke->add_option("--key", rv_key, "agent private key PEM");
  revoke->add_option("--store", rv_store, "local state directory (operator mode)");
  revoke->add_option("--schemas", rv_schemas, "schema directory (operator mode)");
  revoke->add_option("--serial", rv_serial, "certificate serial (operator mode)");

  // crl
  std::string crl_out;
  CLI::App* crl = app.add_subcommand("crl", "fetch the current CRL");
  crl->add_option("--registry", registry_url, "registry base URL");
  crl->add_option("--tls-ca", tls_ca, "CA PEM for the TLS connection");
  crl->add_option("--out", crl_out, "write PEM here instead of stdout");

  // challenge
  std::string ch_store, ch_schemas = "schemas", ch_uuid, ch_input, ch_expected, ch_sim;
  CLI::App* challenge = app.add_subcommand("challenge", "run a capability challenge");
  challenge->add_option("--store", ch_store, "state directory")->required();
  challenge->add_option("--schemas", ch_schemas, "schema directory");
  challenge->add_option("--uuid", ch_uuid, "agent UUID")->required();
  challenge->add_option("--input", ch_input, "challenge input")->required();
  challenge->add_option("--expected", ch_expected, "expected answer")->required();
  challenge->add_option("--simulate-answer", ch_sim, "skip the network, use this answer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*serve) return run_serve(serve_args);
    if (*keygen) return run_keygen(kg_alg, kg_out);
    if (*reg)
      return run_register(registry_url, tls_ca, reg_name, reg_endpoint, reg_key, reg_ext);
    if (*renew) return run_renew(registry_url, tls_ca, rn_name, rn_uuid, rn_key);
    if (*resolve) return run_resolve(registry_url, tls_ca, trust_anchor, rs_name, rs_range);
    if (*revoke)
      return run_revoke(registry_url, tls_ca, rv_name, rv_uuid, rv_key, rv_store, rv_schemas,
                        rv_serial);
    if (*crl) return run_crl(registry_url, tls_ca, crl_out);
    if (*challenge)
      return run_challenge(ch_store, ch_schemas, ch_uuid, ch_input, ch_expected, ch_sim);
  } catch (const ans::AnsError& e) {
    ans::Json err;
    err["code"] = ans::error_code_name(e.code());
    err["message"] = e.what();
    std::cerr << err.dump(2) << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
