#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sys/stat.h>

#include "ans/clock.hpp"
#include "ans/errors.hpp"
#include "ans/pki.hpp"

using namespace ans;

namespace {

CertificateAuthority test_root(const ManualClock& mc, KeyAlgorithm alg = KeyAlgorithm::Ed25519) {
  CertificateAuthority::Options opts;
  opts.name = "Test Root";
  return CertificateAuthority::create_root(opts, alg, mc.clock());
}

Csr agent_csr(const PrivateKey& key) {
  DistinguishedName dn;
  dn.common_name = "textProcessor";
  dn.organizational_unit = "DocumentTranslation";
  dn.organization = "AcmeCorp";
  return Csr::create(key, dn);
}

}  // namespace

TEST_CASE("sign and verify for both algorithms") {
  for (auto alg : {KeyAlgorithm::Ed25519, KeyAlgorithm::EcdsaP256Sha256}) {
    CAPTURE(key_algorithm_name(alg));
    PrivateKey key = PrivateKey::generate(alg);
    PublicKey pub = PublicKey::from_pem(key.public_key_pem());
    CHECK(pub.algorithm() == alg);

    std::string payload = "the payload to protect";
    Signature sig = sign(payload, key);
    CHECK(sig.algorithm == alg);
    CHECK_FALSE(sig.bytes.empty());
    CHECK(verify_signature(payload, sig, pub));

    // altered payload
    CHECK_FALSE(verify_signature(payload + "x", sig, pub));

    // every single-bit flip in the signature fails
    std::mt19937 rng(7);
    for (int i = 0; i < 64; ++i) {
      Signature bad = sig;
      size_t byte = rng() % bad.bytes.size();
      bad.bytes[byte] ^= static_cast<char>(1u << (rng() % 8));
      CHECK_FALSE(verify_signature(payload, bad, pub));
    }

    // truncated and empty signatures fail without throwing
    Signature trunc = sig;
    trunc.bytes.resize(trunc.bytes.size() / 2);
    CHECK_FALSE(verify_signature(payload, trunc, pub));
    Signature empty;
    empty.algorithm = alg;
    CHECK_FALSE(verify_signature(payload, empty, pub));

    // wrong key fails
    PrivateKey other = PrivateKey::generate(alg);
    CHECK_FALSE(verify_signature(payload, sig, PublicKey::from_pem(other.public_key_pem())));
  }
}

TEST_CASE("algorithm names") {
  CHECK(key_algorithm_from_string("ed25519") == KeyAlgorithm::Ed25519);
  CHECK(key_algorithm_from_string("ecdsa-p256-sha256") == KeyAlgorithm::EcdsaP256Sha256);
  CHECK(key_algorithm_name(KeyAlgorithm::Ed25519) == std::string("ed25519"));
  CHECK(key_algorithm_name(KeyAlgorithm::EcdsaP256Sha256) == std::string("ecdsa-p256-sha256"));
  CHECK_THROWS_AS(key_algorithm_from_string("rsa-512"), AnsError);
  try {
    key_algorithm_from_string("rsa-512");
    FAIL("expected UnsupportedAlgorithm");
  } catch (const AnsError& e) {
    CHECK(e.code() == ErrorCode::UnsupportedAlgorithm);
  }
}

TEST_CASE("key pem round trip, encrypted and plain") {
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  std::string plain = key.to_pem();
  PrivateKey back = PrivateKey::from_pem(plain);
  CHECK(back.public_key_pem() == key.public_key_pem());

  std::string enc = key.to_pem("hunter2");
  CHECK(enc.find("ENCRYPTED") != std::string::npos);
  PrivateKey dec = PrivateKey::from_pem(enc, "hunter2");
  CHECK(dec.public_key_pem() == key.public_key_pem());
  CHECK_THROWS(PrivateKey::from_pem(enc, "wrong-passphrase"));
  CHECK_THROWS(PrivateKey::from_pem("not a pem"));
}

TEST_CASE("key files are written 0600") {
  auto dir = std::filesystem::temp_directory_path() / "ans_pki_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "k.pem").string();
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::EcdsaP256Sha256);
  key.save_pem_file(path, "pw");

  struct stat st {};
  REQUIRE(stat(path.c_str(), &st) == 0);
  CHECK((st.st_mode & 0777) == 0600);

  PrivateKey back = PrivateKey::load_pem_file(path, "pw");
  CHECK(back.public_key_pem() == key.public_key_pem());
  std::filesystem::remove_all(dir);
}

TEST_CASE("csr carries subject and self signature") {
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  Csr csr = agent_csr(key);
  CHECK(csr.self_signature_valid());
  DistinguishedName dn = csr.subject();
  CHECK(dn.common_name == "textProcessor");
  CHECK(dn.organizational_unit == "DocumentTranslation");
  CHECK(dn.organization == "AcmeCorp");
  CHECK(dn.to_string() == "CN=textProcessor,OU=DocumentTranslation,O=AcmeCorp");
  CHECK(csr.public_key().to_pem() == key.public_key_pem());

  Csr reparsed = Csr::from_pem(csr.pem());
  CHECK(reparsed.subject().to_string() == dn.to_string());
  CHECK(reparsed.self_signature_valid());
  CHECK_THROWS_AS(Csr::from_pem("garbage"), AnsError);
}

TEST_CASE("issuance produces verifiable leaf certificates") {
  ManualClock mc;
  auto ca = test_root(mc);
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  CertificateBundle bundle = ca.issue(agent_csr(key), 90);

  Certificate leaf = bundle.leaf();
  CHECK(leaf.subject().find("CN=textProcessor") != std::string::npos);
  CHECK(leaf.issuer().find("Test Root") != std::string::npos);
  CHECK_FALSE(leaf.is_self_signed());
  CHECK(leaf.public_key().to_pem() == key.public_key_pem());
  CHECK(leaf.not_after_unix() - leaf.not_before_unix() == 90 * 86400);

  auto res = verify_cert_chain(bundle, ca.certificate(), RevocationList::empty(), mc.now());
  CHECK(res.ok());

  // serials are unique and monotone
  PrivateKey k2 = PrivateKey::generate(KeyAlgorithm::Ed25519);
  CertificateBundle b2 = ca.issue(agent_csr(k2), 90);
  CHECK(b2.leaf().serial() != leaf.serial());
  CHECK(b2.leaf().serial() > leaf.serial());
}

TEST_CASE("three level chain verifies and breaks correctly") {
  ManualClock mc;
  auto root = test_root(mc);
  CertificateAuthority::Options mid_opts;
  mid_opts.name = "Test Issuing CA";
  auto mid = CertificateAuthority::create_intermediate(root, mid_opts, KeyAlgorithm::Ed25519,
                                                       mc.clock());
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::EcdsaP256Sha256);
  CertificateBundle bundle = mid.issue(agent_csr(key), 30);
  REQUIRE(bundle.chain_pems.size() >= 1);

  CHECK(verify_cert_chain(bundle, root.certificate(), RevocationList::empty(), mc.now()).ok());
  CHECK(verify_cert_chain(bundle, mid.certificate(), RevocationList::empty(), mc.now()).ok());

  // a root with a different subject never terminates the walk
  ManualClock other_mc;
  CertificateAuthority::Options stranger_opts;
  stranger_opts.name = "Stranger Root";
  auto stranger = CertificateAuthority::create_root(stranger_opts, KeyAlgorithm::Ed25519,
                                                    other_mc.clock());
  auto res =
      verify_cert_chain(bundle, stranger.certificate(), RevocationList::empty(), mc.now());
  CHECK_FALSE(res.ok());
  CHECK(res.status == ChainStatus::UntrustedRoot);

  // an impostor sharing the subject DN is caught by the key check instead
  auto impostor = test_root(other_mc);
  auto res_dn =
      verify_cert_chain(bundle, impostor.certificate(), RevocationList::empty(), mc.now());
  CHECK_FALSE(res_dn.ok());
  CHECK(res_dn.status == ChainStatus::BadSignature);

  // dropping the intermediate from the bundle breaks the walk
  CertificateBundle broken = bundle;
  broken.chain_pems.clear();
  auto res2 = verify_cert_chain(broken, root.certificate(), RevocationList::empty(), mc.now());
  CHECK_FALSE(res2.ok());
}

TEST_CASE("expiry respects the injected clock") {
  ManualClock mc;
  auto ca = test_root(mc);
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  CertificateBundle bundle = ca.issue(agent_csr(key), 1);

  CHECK(verify_cert_chain(bundle, ca.certificate(), RevocationList::empty(), mc.now()).ok());
  auto later = mc.now() + std::chrono::hours(25);
  auto res = verify_cert_chain(bundle, ca.certificate(), RevocationList::empty(), later);
  CHECK(res.status == ChainStatus::Expired);
  auto before = mc.now() - std::chrono::hours(1);
  CHECK(verify_cert_chain(bundle, ca.certificate(), RevocationList::empty(), before).status ==
        ChainStatus::Expired);
}

TEST_CASE("revocation flips verification") {
  ManualClock mc;
  auto ca = test_root(mc);
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  CertificateBundle bundle = ca.issue(agent_csr(key), 90);
  std::uint64_t serial = bundle.leaf().serial();

  RevocationList crl = ca.current_crl();
  CHECK_FALSE(crl.contains(serial));
  CHECK(verify_cert_chain(bundle, ca.certificate(), crl, mc.now()).ok());

  crl = ca.revoke(serial);
  CHECK(crl.contains(serial));
  auto res = verify_cert_chain(bundle, ca.certificate(), crl, mc.now());
  CHECK(res.status == ChainStatus::Revoked);

  // revoking twice is fine, unknown serials are not
  CHECK(ca.revoke(serial).contains(serial));
  CHECK_THROWS_AS(ca.revoke(999999), AnsError);
}

TEST_CASE("crl pem round trip") {
  ManualClock mc;
  auto ca = test_root(mc);
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  auto bundle = ca.issue(agent_csr(key), 90);
  ca.revoke(bundle.leaf().serial());

  RevocationList parsed = parse_crl_pem(ca.crl_pem());
  CHECK(parsed.contains(bundle.leaf().serial()));
  CHECK(parsed.issued_at == to_unix_seconds(mc.now()));
  CHECK(parsed.next_update - parsed.issued_at == 24 * 3600);
  CHECK(parsed.issuer.find("Test Root") != std::string::npos);
  CHECK_THROWS(parse_crl_pem("junk"));
}

TEST_CASE("tampered certificate fails the chain walk") {
  ManualClock mc;
  auto ca = test_root(mc);
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  auto bundle = ca.issue(agent_csr(key), 90);

  // graft the leaf's subject key onto a certificate signed for another key:
  // simulate by issuing for a second key and swapping leaves
  PrivateKey other = PrivateKey::generate(KeyAlgorithm::Ed25519);
  auto other_bundle = ca.issue(agent_csr(other), 90);

  // self-signed impostor claiming the same subject
  ManualClock mc2;
  auto impostor = test_root(mc2);
  auto fake = impostor.issue(agent_csr(key), 90);
  auto res = verify_cert_chain(fake, ca.certificate(), RevocationList::empty(), mc.now());
  CHECK_FALSE(res.ok());
  CHECK((res.status == ChainStatus::UntrustedRoot || res.status == ChainStatus::BadSignature));
}

TEST_CASE("ca persistence round trip") {
  auto dir = std::filesystem::temp_directory_path() / "ans_ca_persist";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  ManualClock mc;
  std::uint64_t serial = 0;
  std::string leaf_pem;
  {
    auto ca = test_root(mc);
    PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
    auto bundle = ca.issue(agent_csr(key), 90);
    serial = bundle.leaf().serial();
    leaf_pem = bundle.to_pem();
    ca.save(dir.string(), "vault-pass");
  }
  CHECK(CertificateAuthority::exists(dir.string()));
  auto ca = CertificateAuthority::load(dir.string(), "vault-pass", mc.clock());
  CHECK(ca.has_issued(serial));

  // reloaded CA still verifies previously issued certs and keeps serials moving
  auto bundle = CertificateBundle::from_pem(leaf_pem);
  CHECK(verify_cert_chain(bundle, ca.certificate(), ca.current_crl(), mc.now()).ok());
  PrivateKey k2 = PrivateKey::generate(KeyAlgorithm::Ed25519);
  auto b2 = ca.issue(agent_csr(k2), 90);
  CHECK(b2.leaf().serial() > serial);

  CHECK_THROWS(CertificateAuthority::load(dir.string(), "wrong", mc.clock()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("reissue keeps subject and key, rotates serial and window") {
  ManualClock mc;
  auto ca = test_root(mc);
  PrivateKey key = PrivateKey::generate(KeyAlgorithm::Ed25519);
  auto first = ca.issue(agent_csr(key), 90);
  mc.advance(std::chrono::hours(24 * 30));
  auto second = ca.reissue(first.leaf(), 90);

  CHECK(second.leaf().serial() != first.leaf().serial());
  CHECK(second.leaf().subject() == first.leaf().subject());
  CHECK(second.leaf().public_key().to_pem() == key.public_key_pem());
  CHECK(second.leaf().not_after_unix() > first.leaf().not_after_unix());
  CHECK(verify_cert_chain(second, ca.certificate(), ca.current_crl(), mc.now()).ok());
}
