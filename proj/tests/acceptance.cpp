// Acceptance suite: ten scenario criteria, one pass/fail line each.
// Exit code is the number of failed criteria.

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ans/adapters.hpp"
#include "ans/audit_log.hpp"
#include "ans/errors.hpp"
#include "ans/resolver.hpp"
#include "ans/service.hpp"
#include "ans/store.hpp"
#include "support/range_oracle.hpp"
#include "support/test_util.hpp"

using namespace ans;
using ans::test::make_proof;
using ans::test::make_registration;

namespace {

struct Failure : std::runtime_error {
  explicit Failure(const std::string& what) : std::runtime_error(what) {}
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw Failure(msg);
}

std::optional<ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const AnsError& e) {
    return e.code();
  }
  return std::nullopt;
}

class TamperTransport final : public RegistryTransport {
 public:
  TamperTransport(std::shared_ptr<RegistryTransport> inner, std::function<void(Json&)> mutate)
      : inner_(std::move(inner)), mutate_(std::move(mutate)) {}
  Json resolve_capability(const ANSName& name, const std::string& range) override {
    Json wire = inner_->resolve_capability(name, range);
    mutate_(wire);
    return wire;
  }
  std::string fetch_crl() override { return inner_->fetch_crl(); }

 private:
  std::shared_ptr<RegistryTransport> inner_;
  std::function<void(Json&)> mutate_;
};

class ReplayTransport final : public RegistryTransport {
 public:
  explicit ReplayTransport(std::shared_ptr<RegistryTransport> inner) : inner_(std::move(inner)) {}
  Json resolve_capability(const ANSName& name, const std::string& range) override {
    if (!cached_) cached_ = inner_->resolve_capability(name, range);
    return *cached_;
  }
  std::string fetch_crl() override { return inner_->fetch_crl(); }

 private:
  std::shared_ptr<RegistryTransport> inner_;
  std::optional<Json> cached_;
};

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", s);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Full lifecycle for 100 agents across the three protocols.

std::string lifecycle_criterion() {
  auto wall_start = std::chrono::steady_clock::now();
  ManualClock mc;
  Registry registry = Registry::create_ephemeral(ans::test::schema_dir(), mc.clock());
  auto transport = std::make_shared<InProcessTransport>(registry);
  Resolver resolver(transport, registry.trust_anchor(), mc.clock());

  const char* schemes[] = {"mcp", "a2a", "acp"};
  struct Row {
    ans::test::TestAgent agent;
    std::string name;
    std::string uuid;
    std::string endpoint;
  };
  std::vector<Row> rows;
  rows.reserve(100);

  for (int i = 0; i < 100; ++i) {
    std::string name = std::string(schemes[i % 3]) + "://agent" + std::to_string(i) +
                       ".translate.acme.v1.0.0";
    std::string endpoint = "https://agents.example.com/" + std::to_string(i);
    auto agent = make_registration(name, endpoint);
    Json response = registry.register_agent(agent.request);
    require(response["status"] == "active", "registration not active for " + name);
    rows.push_back({std::move(agent), name, response["agentUuid"], endpoint});
  }
  for (const Row& r : rows) {
    auto hit = resolver.resolve(r.name, "1.0.0");
    require(hit.endpoint == r.endpoint, "wrong endpoint resolved for " + r.name);
  }
  for (const Row& r : rows) {
    Json body;
    body["ansName"] = r.name;
    body["agentUuid"] = r.uuid;
    body["proof"] = make_proof(r.agent.key, r.uuid, r.name, "renew");
    Json response = registry.renew_agent(body);
    require(response["status"] == "active", "renewal failed for " + r.name);
  }
  for (const Row& r : rows) {
    Json body;
    body["ansName"] = r.name;
    body["agentUuid"] = r.uuid;
    body["proof"] = make_proof(r.agent.key, r.uuid, r.name, "deregister");
    Json response = registry.deregister_agent(body);
    require(response["status"] == "deregistered", "deregistration failed for " + r.name);
  }
  mc.advance(std::chrono::seconds(301));  // age cached records out
  for (const Row& r : rows) {
    auto code = code_of([&] { resolver.resolve(r.name, "1.0.0"); });
    require(code == ErrorCode::AgentNotFound,
            "post-deregistration resolve returned " +
                std::string(code ? error_code_name(*code) : "success") + " for " + r.name);
  }

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
                    .count();
  require(secs < 60.0, "lifecycle took " + fmt_seconds(secs) + "s, budget is 60s");
  return "(100 agents, " + fmt_seconds(secs) + "s)";
}

// ---------------------------------------------------------------------------
// 2. Fail-closed resolution under five tamper modes, 100 trials each.

std::string tamper_criterion() {
  constexpr int kTrials = 100;
  const std::string name = "mcp://victim.translate.acme.v1.0.0";

  auto ephemeral = [](ManualClock& mc) {
    return Registry::create_ephemeral(ans::test::schema_dir(), mc.clock());
  };
  auto run_trial = [&](std::shared_ptr<RegistryTransport> transport, const Certificate& anchor,
                       Clock clock, const char* want) {
    Resolver resolver(std::move(transport), anchor, std::move(clock));
    try {
      resolver.resolve(name, "*");
      return false;
    } catch (const AnsError& e) {
      return e.code() == ErrorCode::InvalidEndpoint &&
             std::string(e.what()).find(want) != std::string::npos;
    }
  };
  auto summarize = [&](const char* mode, int closed) {
    require(closed == kTrials, std::string(mode) + ": only " + std::to_string(closed) + "/" +
                                   std::to_string(kTrials) + " trials failed closed");
  };

  {  // flipped signature byte
    ManualClock mc;
    Registry registry = ephemeral(mc);
    registry.register_agent(make_registration(name, "https://real.example.com").request);
    auto inner = std::make_shared<InProcessTransport>(registry);
    int closed = 0;
    for (int i = 0; i < kTrials; ++i) {
      int index = i % 64;
      auto tampered = std::make_shared<TamperTransport>(inner, [index](Json& w) {
        std::string raw = base64_decode(w["signature"].get<std::string>());
        raw[static_cast<size_t>(index) % raw.size()] ^= 0x01;
        w["signature"] = base64_encode(raw);
      });
      if (run_trial(tampered, registry.trust_anchor(), mc.clock(), "InvalidSignature")) ++closed;
    }
    summarize("flipped signature byte", closed);
  }
  {  // substituted endpoint
    ManualClock mc;
    Registry registry = ephemeral(mc);
    registry.register_agent(make_registration(name, "https://real.example.com").request);
    auto inner = std::make_shared<InProcessTransport>(registry);
    int closed = 0;
    for (int i = 0; i < kTrials; ++i) {
      std::string evil = "https://evil-" + std::to_string(i) + ".example.com";
      auto tampered = std::make_shared<TamperTransport>(
          inner, [evil](Json& w) { w["Endpoint"] = evil; });
      if (run_trial(tampered, registry.trust_anchor(), mc.clock(), "contradicts")) ++closed;
    }
    summarize("substituted endpoint", closed);
  }
  {  // untrusted registry certificate
    ManualClock mc;
    Registry victim = ephemeral(mc);
    CertificateAuthority::Options impostor_opts;
    impostor_opts.name = "Impostor Root CA";
    CertificateAuthority impostor_ca =
        CertificateAuthority::create_root(impostor_opts, KeyAlgorithm::Ed25519, mc.clock());
    PrivateKey impostor_key = PrivateKey::generate(KeyAlgorithm::Ed25519);
    CertificateBundle impostor_bundle = impostor_ca.issue(
        Csr::create(impostor_key, DistinguishedName{"ans-registry", "service", "ANS"}), 3650,
        false);
    auto audit_path =
        std::filesystem::temp_directory_path() /
        ("ans-acceptance-impostor-" + std::to_string(std::random_device{}()) + ".ndjson");
    Registry impostor(open_sqlite_store(":memory:"), std::move(impostor_ca),
                      std::move(impostor_key), std::move(impostor_bundle),
                      SchemaRegistry::load(ans::test::schema_dir()), AdapterSet::standard(),
                      std::make_shared<AuditLog>(audit_path.string(), mc.clock()), mc.clock(),
                      RegistryConfig{});
    impostor.register_agent(make_registration(name, "https://evil.example.com").request);
    auto transport = std::make_shared<InProcessTransport>(impostor);
    int closed = 0;
    for (int i = 0; i < kTrials; ++i)
      if (run_trial(transport, victim.trust_anchor(), mc.clock(), "UntrustedRoot")) ++closed;
    summarize("untrusted registry certificate", closed);
  }
  {  // revoked registry certificate
    ManualClock mc;
    Registry registry = ephemeral(mc);
    registry.register_agent(make_registration(name, "https://real.example.com").request);
    registry.revoke_serial(registry.signing_bundle().leaf().serial());
    auto transport = std::make_shared<InProcessTransport>(registry);
    int closed = 0;
    for (int i = 0; i < kTrials; ++i)
      if (run_trial(transport, registry.trust_anchor(), mc.clock(), "Revoked")) ++closed;
    summarize("revoked registry certificate", closed);
  }
  {  // expired certificate
    ManualClock mc;
    Registry registry = ephemeral(mc);
    registry.register_agent(make_registration(name, "https://real.example.com").request);
    auto replay =
        std::make_shared<ReplayTransport>(std::make_shared<InProcessTransport>(registry));
    replay->resolve_capability(ANSName::parse(name), "*");  // capture while valid
    mc.advance(std::chrono::hours(24) * 3651);              // outlive the signing certificate
    int closed = 0;
    for (int i = 0; i < kTrials; ++i)
      if (run_trial(replay, registry.trust_anchor(), mc.clock(), "Expired")) ++closed;
    summarize("expired certificate", closed);
  }
  return "(5 modes x 100/100 trials)";
}

// ---------------------------------------------------------------------------
// 3. Version negotiation matrix against an independent oracle.

std::string negotiation_criterion() {
  const char* versions[] = {"1.0.0", "1.2.3", "1.0.0-rc1", "2.0.0"};
  struct Expect {
    const char* range;
    const char* version;  // nullptr = no satisfying version
  };
  const Expect table[] = {{"*", "2.0.0"},
                          {"1.0.0", "1.0.0"},
                          {"^1.0.0", "1.2.3"},
                          {"~1.2.0", "1.2.3"},
                          {"^3.0.0", nullptr}};

  // interval-arithmetic oracle over the release candidates
  for (const Expect& e : table) {
    std::optional<ans::test::Triple> best;
    for (const char* v : versions) {
      if (std::string(v).find('-') != std::string::npos) continue;  // releases only
      auto triple = ans::test::oracle_parse_triple(v);
      require(triple.has_value(), std::string("oracle cannot parse ") + v);
      auto sat = ans::test::oracle_satisfies(*triple, e.range);
      require(sat.has_value(), std::string("oracle cannot parse range ") + e.range);
      if (*sat && (!best || ans::test::oracle_cmp(*triple, *best) > 0)) best = *triple;
    }
    std::string got = best ? std::to_string((*best)[0]) + "." + std::to_string((*best)[1]) +
                                 "." + std::to_string((*best)[2])
                           : "";
    std::string want = e.version ? e.version : "";
    require(got == want, std::string("oracle disagrees with the table for ") + e.range +
                             ": oracle says '" + got + "', table says '" + want + "'");
  }

  // library negotiation over the full candidate set
  std::vector<SemVer> candidates;
  for (const char* v : versions) candidates.push_back(*parse_version(v));
  for (const Expect& e : table) {
    auto idx = negotiate_version(candidates, VersionRange::parse(e.range));
    if (e.version) {
      require(idx.has_value(), std::string("no candidate negotiated for ") + e.range);
      require(candidates[*idx].to_string() == e.version,
              std::string("negotiated ") + candidates[*idx].to_string() + " for " + e.range +
                  ", expected " + e.version);
    } else {
      require(!idx.has_value(), std::string("negotiated a candidate for ") + e.range);
    }
  }

  // registry-level, through a verifying resolver
  ManualClock mc;
  Registry registry = Registry::create_ephemeral(ans::test::schema_dir(), mc.clock());
  for (const char* v : versions)
    registry.register_agent(
        make_registration("mcp://matrix.translate.acme.v" + std::string(v),
                          "https://matrix.example.com/" + std::string(v))
            .request);
  Resolver resolver(std::make_shared<InProcessTransport>(registry), registry.trust_anchor(),
                    mc.clock());
  for (const Expect& e : table) {
    if (e.version) {
      auto hit = resolver.resolve("mcp://matrix.translate.acme.v1.0.0", e.range);
      require(hit.negotiated_version.to_string() == e.version,
              std::string("resolver negotiated ") + hit.negotiated_version.to_string() +
                  " for " + e.range);
    } else {
      require(code_of([&] { resolver.resolve("mcp://matrix.translate.acme.v1.0.0", e.range); }) ==
                  ErrorCode::IncompatibleVersion,
              std::string("resolver admitted ") + e.range);
    }
  }

  // the prerelease rule: a release beats a prerelease under the wildcard
  for (const char* v : {"1.0.0-rc1", "1.0.0"})
    registry.register_agent(
        make_registration("mcp://prerelease.translate.acme.v" + std::string(v),
                          "https://prerelease.example.com/" + std::string(v))
            .request);
  auto rule = resolver.resolve("mcp://prerelease.translate.acme.v1.0.0", "*");
  require(rule.negotiated_version.to_string() == "1.0.0",
          "wildcard negotiated " + rule.negotiated_version.to_string() +
              " instead of the 1.0.0 release");

  return "(5 ranges x 4 versions, prerelease rule holds)";
}

// ---------------------------------------------------------------------------
// 4. TTL semantics on the resolver cache.

std::string ttl_criterion() {
  ManualClock mc;
  Registry registry = Registry::create_ephemeral(ans::test::schema_dir(), mc.clock());
  registry.register_agent(
      make_registration("mcp://cached.translate.acme.v1.0.0", "https://cached.example.com")
          .request);
  Resolver resolver(std::make_shared<InProcessTransport>(registry), registry.trust_anchor(),
                    mc.clock());
  const std::string name = "mcp://cached.translate.acme.v1.0.0";

  resolver.resolve(name, "*");
  require(resolver.fetch_count() == 1, "first resolve did not fetch exactly once");

  mc.advance(std::chrono::seconds(299));
  resolver.resolve(name, "*");
  require(resolver.fetch_count() == 1,
          "resolve at +299s fetched again; got " + std::to_string(resolver.fetch_count()));

  mc.advance(std::chrono::seconds(2));
  resolver.resolve(name, "*");
  require(resolver.fetch_count() == 2,
          "resolve at +301s performed " + std::to_string(resolver.fetch_count() - 1) +
              " re-fetches, expected exactly 1");
  return "(+299s zero fetches, +301s one re-fetch)";
}

// ---------------------------------------------------------------------------
// 5. Token bucket counts, exact to the token.

std::string rate_limit_criterion() {
  ManualClock mc;
  RateLimiter limiter(RateLimitConfig{}, mc.clock());  // 500 capacity, 100/s

  int first = 0;
  for (int i = 0; i < 600; ++i)
    if (limiter.allow("client", "capability")) ++first;
  require(first == 500, "burst admitted " + std::to_string(first) + ", expected exactly 500");

  mc.advance(std::chrono::seconds(1));
  int second = 0;
  for (int i = 0; i < 600; ++i)
    if (limiter.allow("client", "capability")) ++second;
  require(second == 100,
          "+1.0s admitted " + std::to_string(second) + ", expected exactly 100");
  return "(burst 500 then reject, +1.0s exactly 100)";
}

// ---------------------------------------------------------------------------
// 6. Schema mutant matrix plus randomized emitted-message round trips.

Json valid_instance(MessageKind kind) {
  Json cert = {{"subject", "CN=a,OU=b,O=c"}, {"issuer", "CN=Test Root"}, {"pem", "-----"}};
  switch (kind) {
    case MessageKind::RegistrationRequest:
      return {{"protocol", "mcp"},   {"agentID", "a"},     {"agentCapability", "b"},
              {"provider", "c"},     {"version", "1.2.3"}, {"certificate", cert}};
    case MessageKind::RegistrationResponse:
      return {{"ansName", "mcp://a.b.c.v1.2.3"},
              {"agentUuid", "152fdc3f-53ad-5d31-989f-5ce516e11f5b"},
              {"certificate", cert},
              {"registeredAt", 1700000000},
              {"expiresAt", 1707776000},
              {"status", "active"}};
    case MessageKind::RenewalRequest:
      return {{"ansName", "mcp://a.b.c.v1.2.3"},
              {"agentUuid", "152fdc3f-53ad-5d31-989f-5ce516e11f5b"},
              {"proof", {{"algorithm", "ed25519"}, {"signature", "c2ln"}, {"nonce", "n-10000001"}}}};
    case MessageKind::RenewalResponse:
      return {{"ansName", "mcp://a.b.c.v1.2.3"},
              {"agentUuid", "152fdc3f-53ad-5d31-989f-5ce516e11f5b"},
              {"certificate", cert},
              {"renewedAt", 1700000000},
              {"expiresAt", 1707776000},
              {"status", "active"}};
    case MessageKind::CapabilityRequest:
      return {{"requestType", "resolve"}, {"protocol", "mcp"}, {"agentID", "a"},
              {"agentCapability", "b"},   {"provider", "c"},   {"version", "^1.0.0"}};
    case MessageKind::CapabilityResponse:
      return {{"Endpoint", "https://agent.example.com/api"},
              {"signature", "c2lnbmF0dXJl"},
              {"cert", "-----BEGIN CERTIFICATE-----"}};
  }
  return Json::object();
}

std::string schema_criterion() {
  SchemaRegistry schemas = SchemaRegistry::load(ans::test::schema_dir());
  const MessageKind kinds[] = {MessageKind::RegistrationRequest,
                               MessageKind::RegistrationResponse,
                               MessageKind::RenewalRequest,
                               MessageKind::RenewalResponse,
                               MessageKind::CapabilityRequest,
                               MessageKind::CapabilityResponse};

  // every single-required-field-deletion mutant, nested objects included,
  // derived from the schema documents themselves
  int mutants = 0;
  for (MessageKind kind : kinds) {
    Json valid = valid_instance(kind);
    auto ok = schemas.validate(kind, valid);
    require(ok.valid,
            std::string(message_kind_name(kind)) + ": valid instance rejected: " + ok.to_string());

    std::function<void(const Json&, const Json&, const std::vector<std::string>&)> walk =
        [&](const Json& schema, const Json& instance, const std::vector<std::string>& path) {
          if (!schema.is_object() || !instance.is_object()) return;
          auto req = schema.find("required");
          if (req != schema.end() && req->is_array()) {
            for (const auto& f : *req) {
              std::string field = f.get<std::string>();
              if (!instance.contains(field)) continue;
              Json mutant = valid;
              Json* node = &mutant;
              for (const auto& seg : path) node = &(*node)[seg];
              node->erase(field);
              require(!schemas.validate(kind, mutant).valid,
                      std::string(message_kind_name(kind)) + ": accepted despite missing " +
                          field);
              ++mutants;
            }
          }
          auto props = schema.find("properties");
          if (props != schema.end() && props->is_object()) {
            for (auto it = props->begin(); it != props->end(); ++it) {
              if (instance.contains(it.key()) && instance.at(it.key()).is_object()) {
                auto next = path;
                next.push_back(it.key());
                walk(it.value(), instance.at(it.key()), next);
              }
            }
          }
        };
    walk(schemas.schema_for(kind), valid, {});
  }
  require(mutants >= 30, "mutant matrix only produced " + std::to_string(mutants) + " cases");

  // randomized registrations; every emitted message must validate against its
  // own response schema
  ManualClock mc;
  Registry registry = Registry::create_ephemeral(ans::test::schema_dir(), mc.clock());
  InProcessTransport transport(registry);
  std::mt19937 rng(20260822);
  std::uniform_int_distribution<int> digit(0, 9);
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<int> span(3, 8);
  auto word = [&] {
    std::string s = "c";
    int k = span(rng);
    for (int i = 0; i < k; ++i) s.push_back(static_cast<char>('a' + letter(rng)));
    return s;
  };
  const char* schemes[] = {"mcp", "a2a", "acp"};

  int messages = 0;
  for (int i = 0; i < 334; ++i) {
    std::string version = std::to_string(digit(rng)) + "." + std::to_string(digit(rng)) + "." +
                          std::to_string(digit(rng));
    std::string name = std::string(schemes[i % 3]) + "://fuzz" + std::to_string(i) + "." +
                       word() + "." + word() + ".v" + version;
    auto agent = make_registration(name, "https://fuzz.example.com/" + std::to_string(i));

    Json registered = registry.register_agent(agent.request);
    auto r1 = schemas.validate(MessageKind::RegistrationResponse, registered);
    require(r1.valid, "emitted registration response invalid: " + r1.to_string());
    ++messages;

    Json renew_body;
    renew_body["ansName"] = name;
    renew_body["agentUuid"] = registered["agentUuid"];
    renew_body["proof"] = make_proof(agent.key, registered["agentUuid"], name, "renew");
    Json renewed = registry.renew_agent(renew_body);
    auto r2 = schemas.validate(MessageKind::RenewalResponse, renewed);
    require(r2.valid, "emitted renewal response invalid: " + r2.to_string());
    ++messages;

    Json wire = transport.resolve_capability(ANSName::parse(name), version);
    auto r3 = schemas.validate(MessageKind::CapabilityResponse, wire);
    require(r3.valid, "emitted capability response invalid: " + r3.to_string());
    ++messages;
  }
  require(messages >= 1000,
          "only " + std::to_string(messages) + " emitted messages were checked");
  return "(" + std::to_string(mutants) + " mutants rejected, " + std::to_string(messages) +
         " emitted messages conform)";
}

// ---------------------------------------------------------------------------
// 7. ANSName parse/format property suite.

std::string ansname_criterion() {
  {  // documented example names parse to their exact tuples
    ANSName a = ANSName::parse("a2a://textProcessor.DocumentTranslation.AcmeCorp.v2.1.hipaa");
    require(a.protocol == Protocol::A2a && a.agent_id == "textProcessor" &&
                a.capability == "DocumentTranslation" && a.provider == "AcmeCorp" &&
                a.version.to_string() == "2.1.0" && a.extension && *a.extension == "hipaa",
            "a2a example name parsed to the wrong tuple");
    ANSName m = ANSName::parse("mcp://sentimentAnalyzer.textAnalysis.ExampleCorp.v1.0");
    require(m.protocol == Protocol::Mcp && m.agent_id == "sentimentAnalyzer" &&
                m.capability == "textAnalysis" && m.provider == "ExampleCorp" &&
                m.version.to_string() == "1.0.0" && !m.extension,
            "mcp example name parsed to the wrong tuple");
  }

  std::mt19937 rng(20260822);
  std::uniform_int_distribution<int> num(0, 99);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<int> pick(0, 63);
  const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-";
  auto looks_like_version_label = [](const std::string& s) {
    if (s.size() < 2 || s[0] != 'v' || !std::isdigit(static_cast<unsigned char>(s[1])))
      return false;
    size_t i = 1;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    return i == s.size() || s[i] == '-' || s[i] == '+';
  };
  auto label = [&] {
    std::string s;
    do {
      s.clear();
      int k = len(rng);
      for (int i = 0; i < k; ++i) s.push_back(alphabet[pick(rng)]);
    } while (looks_like_version_label(s));
    return s;
  };
  const char* schemes[] = {"a2a", "mcp", "acp", "fipa", "x-custom"};
  const char* pres[] = {"", "rc1", "beta", "alpha3", "5"};
  const char* builds[] = {"", "build9", "sha-deadbee"};

  for (int i = 0; i < 10000; ++i) {
    ANSName n;
    std::string scheme = schemes[num(rng) % 5];
    if (auto p = protocol_from_string(scheme)) {
      n.protocol = *p;
    } else {
      n.protocol = Protocol::Extensible;
      n.scheme = scheme;
    }
    n.agent_id = label();
    n.capability = label();
    n.provider = label();
    n.version.major = num(rng);
    n.version.minor = num(rng);
    n.version.patch = num(rng);
    const char* pre = pres[num(rng) % 5];
    if (*pre) n.version.prerelease = {pre};
    const char* build = builds[num(rng) % 3];
    if (*build) n.version.build = build;
    if (num(rng) % 3 == 0) {
      std::string ext = label();
      if (num(rng) % 2 == 0) ext += "." + label();
      n.extension = ext;
    }

    std::string packed = n.to_string();
    ANSName reparsed = ANSName::parse(packed);
    require(reparsed == n && reparsed.to_string() == packed,
            "round trip failed at iteration " + std::to_string(i) + " for " + packed);
  }
  return "(10000 round trips, 2 documented names)";
}

// ---------------------------------------------------------------------------
// 8. PKI sign/verify, 3-level chains, revocation flip.

std::string pki_criterion() {
  ManualClock mc;
  std::mt19937 rng(90125);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> span(1, 512);

  PrivateKey ed = PrivateKey::generate(KeyAlgorithm::Ed25519);
  PrivateKey ec = PrivateKey::generate(KeyAlgorithm::EcdsaP256Sha256);
  PublicKey ed_pub = PublicKey::from_der(ed.public_key_der());
  PublicKey ec_pub = PublicKey::from_der(ec.public_key_der());

  for (int i = 0; i < 1000; ++i) {
    const PrivateKey& key = (i % 2 == 0) ? ed : ec;
    const PublicKey& pub = (i % 2 == 0) ? ed_pub : ec_pub;
    std::string payload;
    int k = span(rng);
    payload.reserve(k);
    for (int j = 0; j < k; ++j) payload.push_back(static_cast<char>(byte(rng)));

    Signature sig = sign(payload, key);
    require(verify_signature(payload, sig, pub),
            "signature failed to verify at iteration " + std::to_string(i));

    Signature flipped = sig;
    size_t pos = static_cast<size_t>(byte(rng)) % flipped.bytes.size();
    flipped.bytes[pos] = static_cast<char>(flipped.bytes[pos] ^ (1 << (i % 8)));
    require(!verify_signature(payload, flipped, pub),
            "bit-flipped signature verified at iteration " + std::to_string(i));

    std::string mutated = payload;
    size_t mpos = static_cast<size_t>(byte(rng)) % mutated.size();
    mutated[mpos] = static_cast<char>(mutated[mpos] ^ 0x01);
    require(!verify_signature(mutated, sig, pub),
            "signature verified over a mutated payload at iteration " + std::to_string(i));
  }

  CertificateAuthority::Options root_opts;
  root_opts.name = "Acceptance Root";
  CertificateAuthority root =
      CertificateAuthority::create_root(root_opts, KeyAlgorithm::Ed25519, mc.clock());
  CertificateAuthority::Options mid_opts;
  mid_opts.name = "Acceptance Issuing";
  CertificateAuthority mid =
      CertificateAuthority::create_intermediate(root, mid_opts, KeyAlgorithm::Ed25519, mc.clock());

  PrivateKey leaf_key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  DistinguishedName dn;
  dn.common_name = "leafAgent";
  dn.organizational_unit = "translate";
  dn.organization = "acme";
  CertificateBundle leaf = mid.issue(Csr::create(leaf_key, dn), 30);

  RevocationList before = mid.current_crl();
  require(verify_cert_chain(leaf, root.certificate(), before, mc.now()).ok(),
          "3-level chain did not verify under the root");

  mid.revoke(leaf.leaf().serial());
  RevocationList after = mid.current_crl();  // the one refresh
  require(verify_cert_chain(leaf, root.certificate(), after, mc.now()).status ==
              ChainStatus::Revoked,
          "revocation did not flip chain verification after one CRL refresh");
  return "(1000 payloads with bit flips, 3-level chain, revocation flip)";
}

// ---------------------------------------------------------------------------
// 9. Agent UUID derivation against an independent UUIDv5 construction.

std::array<unsigned char, 16> ref_uuid5(const std::array<unsigned char, 16>& ns,
                                        const std::string& name) {
  std::vector<unsigned char> buf(ns.begin(), ns.end());
  buf.insert(buf.end(), name.begin(), name.end());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  EVP_Digest(buf.data(), buf.size(), md, &n, EVP_sha1(), nullptr);
  std::array<unsigned char, 16> out{};
  std::copy(md, md + 16, out.begin());
  out[6] = static_cast<unsigned char>((out[6] & 0x0F) | 0x50);
  out[8] = static_cast<unsigned char>((out[8] & 0x3F) | 0x80);
  return out;
}

std::string ref_format(const std::array<unsigned char, 16>& b) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 16; ++i) {
    if (i == 4 || i == 6 || i == 8 || i == 10) s.push_back('-');
    s.push_back(hex[b[i] >> 4]);
    s.push_back(hex[b[i] & 0x0F]);
  }
  return s;
}

std::string uuid_criterion() {
  // RFC 4122 DNS namespace, bytes written out longhand
  const std::array<unsigned char, 16> dns = {0x6b, 0xa7, 0xb8, 0x10, 0x9d, 0xad, 0x11, 0xd1,
                                             0x80, 0xb4, 0x00, 0xc0, 0x4f, 0xd4, 0x30, 0xc8};
  auto ns = ref_uuid5(dns, "ans.agent-registry.local");
  require(ref_format(ns) == ans_namespace_uuid().to_string(),
          "namespace uuid disagrees with the independent construction");

  for (int i = 0; i < 20; ++i) {
    KeyAlgorithm alg = (i % 2 == 0) ? KeyAlgorithm::Ed25519 : KeyAlgorithm::EcdsaP256Sha256;
    PrivateKey key = PrivateKey::generate(alg);
    PublicKey pub = PublicKey::from_der(key.public_key_der());
    std::string expected = ref_format(ref_uuid5(ns, sha256_hex(pub.to_der())));
    std::string got = Registry::derive_agent_uuid(pub);
    require(got == expected, "uuid mismatch for key " + std::to_string(i) + ": derived " + got +
                                 ", oracle " + expected);
    require(got[14] == '5', "uuid version nibble is not 5: " + got);
  }
  return "(20 keys, namespace cross-checked)";
}

// ---------------------------------------------------------------------------
// 10. Challenge-response validation and quarantine.

std::string challenge_criterion() {
  ManualClock mc;
  Registry registry = Registry::create_ephemeral(ans::test::schema_dir(), mc.clock());
  const std::string name = "mcp://prover.translate.acme.v1.0.0";
  Json response =
      registry.register_agent(make_registration(name, "https://prover.example.com").request);
  const std::string uuid = response["agentUuid"];

  Challenge challenge;
  challenge.challenge_id = "c-1";
  challenge.input = "2+2";
  challenge.expected = "4";
  challenge.claimed_accuracy = 0.9;

  ans::test::ScriptedProbe good("4", 0.95);
  ChallengeOutcome pass = registry.run_capability_challenge(uuid, challenge, good);
  require(pass.passed, "correct confident answer did not pass");
  require(registry.find_agent(uuid)->status == AgentStatus::Active,
          "agent not in the validated active state after a pass");
  {
    Resolver resolver(std::make_shared<InProcessTransport>(registry), registry.trust_anchor(),
                      mc.clock());
    require(resolver.resolve(name, "*").endpoint == "https://prover.example.com",
            "validated agent did not resolve");
  }

  // wrong answer, then a right answer below the claimed accuracy, then wrong
  ans::test::ScriptedProbe wrong("5", 0.99);
  ans::test::ScriptedProbe timid("4", 0.5);
  require(!registry.run_capability_challenge(uuid, challenge, wrong).passed,
          "wrong answer passed");
  require(!registry.run_capability_challenge(uuid, challenge, timid).passed,
          "answer below the claimed accuracy passed");
  require(registry.find_agent(uuid)->status == AgentStatus::Active,
          "agent quarantined before the third consecutive failure");
  require(!registry.run_capability_challenge(uuid, challenge, wrong).passed,
          "wrong answer passed");

  require(registry.find_agent(uuid)->status == AgentStatus::Quarantined,
          "three consecutive failures did not quarantine the agent");

  Resolver resolver(std::make_shared<InProcessTransport>(registry), registry.trust_anchor(),
                    mc.clock());
  require(code_of([&] { resolver.resolve(name, "*"); }) == ErrorCode::AgentNotFound,
          "quarantined agent still resolves");
  require(code_of([&] { registry.get_agent_endpoint_record(uuid); }) ==
              ErrorCode::InactiveAgent,
          "quarantined agent still serves endpoint records");
  return "(pass validates, 3 failures quarantine and block resolution)";
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* title;
    std::string (*run)();
  };
  const Criterion criteria[] = {
      {1, "lifecycle register/resolve/renew/deregister, 100 agents, 3 protocols",
       lifecycle_criterion},
      {2, "resolution fails closed under every tamper mode", tamper_criterion},
      {3, "version negotiation matches the independent oracle", negotiation_criterion},
      {4, "resolver cache honors the record TTL", ttl_criterion},
      {5, "token bucket admits exact counts", rate_limit_criterion},
      {6, "schemas reject required-field mutants; emitted messages conform", schema_criterion},
      {7, "name grammar round-trips", ansname_criterion},
      {8, "signatures, chains, and revocation behave", pki_criterion},
      {9, "agent uuids match the independent derivation", uuid_criterion},
      {10, "challenges validate and quarantine", challenge_criterion},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    bool ok = true;
    try {
      detail = c.run();
    } catch (const std::exception& e) {
      ok = false;
      detail = e.what();
    }
    std::printf("%s %2d  %s %s\n", ok ? "PASS" : "FAIL", c.number, c.title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed;
}
