#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ans/ansname.hpp"
#include "ans/clock.hpp"

// Forward declarations so this header does not leak <openssl/*.h> everywhere.
typedef struct evp_pkey_st EVP_PKEY;
typedef struct x509_st X509;
typedef struct X509_req_st X509_REQ;

namespace ans {

enum class KeyAlgorithm { Ed25519, EcdsaP256Sha256 };

const char* key_algorithm_name(KeyAlgorithm alg);
// throws AnsError(UnsupportedAlgorithm) for anything else ("rsa-512", ...)
KeyAlgorithm key_algorithm_from_string(const std::string& name);

struct Signature {
  KeyAlgorithm algorithm = KeyAlgorithm::Ed25519;
  std::string bytes;
};

// Immutable after construction; shareable across threads.
class PrivateKey {
 public:
  static PrivateKey generate(KeyAlgorithm alg);
  static PrivateKey generate(const std::string& alg_name);
  static PrivateKey from_pem(const std::string& pem, const std::string& passphrase = "");
  static PrivateKey load_pem_file(const std::string& path, const std::string& passphrase = "");

  // Encrypted PEM (AES-256-CBC) when a passphrase is given; file mode 0600.
  void save_pem_file(const std::string& path, const std::string& passphrase = "") const;
  std::string to_pem(const std::string& passphrase = "") const;

  KeyAlgorithm algorithm() const;
  std::string public_key_pem() const;
  std::string public_key_der() const;  // SubjectPublicKeyInfo DER

  EVP_PKEY* handle() const { return pkey_.get(); }

 private:
  explicit PrivateKey(std::shared_ptr<EVP_PKEY> k) : pkey_(std::move(k)) {}
  std::shared_ptr<EVP_PKEY> pkey_;
};

class PublicKey {
 public:
  static PublicKey from_pem(const std::string& pem);
  static PublicKey from_der(const std::string& der);

  std::string to_pem() const;
  std::string to_der() const;
  KeyAlgorithm algorithm() const;

  EVP_PKEY* handle() const { return pkey_.get(); }

 private:
  friend class PrivateKey;
  friend class Certificate;
  friend class Csr;
  explicit PublicKey(std::shared_ptr<EVP_PKEY> k) : pkey_(std::move(k)) {}
  std::shared_ptr<EVP_PKEY> pkey_;
};

Signature sign(const std::string& data, const PrivateKey& key);
// false on any failure, malformed signatures included
bool verify_signature(const std::string& data, const Signature& sig, const PublicKey& pub);

// DN mapping for agent certificates: CN=agentID, OU=capability, O=provider.
struct DistinguishedName {
  std::string common_name;
  std::string organizational_unit;
  std::string organization;

  static DistinguishedName for_agent(const ANSName& name);
  std::string to_string() const;  // "CN=...,OU=...,O=..."
};

class Csr {
 public:
  static Csr create(const PrivateKey& key, const DistinguishedName& subject);
  static Csr from_pem(const std::string& pem);  // throws InvalidCSR on parse failure

  std::string pem() const;
  bool self_signature_valid() const;
  DistinguishedName subject() const;
  PublicKey public_key() const;

  X509_REQ* handle() const { return req_.get(); }

 private:
  explicit Csr(std::shared_ptr<X509_REQ> r) : req_(std::move(r)) {}
  std::shared_ptr<X509_REQ> req_;
};

class Certificate {
 public:
  static Certificate from_pem(const std::string& pem);

  std::string pem() const;
  std::string der() const;
  std::uint64_t serial() const;
  std::string subject() const;
  std::string issuer() const;
  PublicKey public_key() const;
  std::int64_t not_before_unix() const;
  std::int64_t not_after_unix() const;
  bool is_self_signed() const;

  X509* handle() const { return cert_.get(); }

 private:
  friend class CertificateAuthority;
  explicit Certificate(std::shared_ptr<X509> c) : cert_(std::move(c)) {}
  std::shared_ptr<X509> cert_;
};

// Leaf plus its ordered issuer chain (closest issuer first). The trust
// anchor itself need not be included.
struct CertificateBundle {
  std::string leaf_pem;
  std::vector<std::string> chain_pems;

  // Accepts one or more concatenated PEM certificates; first is the leaf.
  static CertificateBundle from_pem(const std::string& concatenated_pem);
  std::string to_pem() const;

  Certificate leaf() const { return Certificate::from_pem(leaf_pem); }
  std::vector<Certificate> chain() const;
};

struct RevocationList {
  std::string issuer;
  std::set<std::uint64_t> revoked;
  std::int64_t issued_at = 0;
  std::int64_t next_update = 0;

  bool contains(std::uint64_t serial) const { return revoked.count(serial) != 0; }
  static RevocationList empty() { return {}; }
};

RevocationList parse_crl_pem(const std::string& pem);

enum class ChainStatus { Ok, Revoked, Expired, UntrustedRoot, BadSignature };
const char* chain_status_name(ChainStatus s);

struct ChainResult {
  ChainStatus status = ChainStatus::Ok;
  std::string detail;
  bool ok() const { return status == ChainStatus::Ok; }
};

// Walks the chain exactly as the resolution rules demand: for each link,
// check validity window against `at`, check the serial against the CRL,
// then verify the link's signature, terminating as soon as the signer is
// the trust anchor. Never throws; failures come back as a reason code.
ChainResult verify_cert_chain(const CertificateBundle& bundle, const Certificate& trusted_ca,
                              const RevocationList& crl,
                              std::chrono::system_clock::time_point at);

// Test/operator CA plus the registry's issuing context. Issuance serializes
// on an internal mutex (unique monotone serials); verification helpers above
// are freely concurrent.
class CertificateAuthority {
 public:
  struct Options {
    std::string name = "ANS Root CA";
    int validity_days = 3650;
    int crl_next_update_hours = 24;
  };

  static CertificateAuthority create_root(const Options& opts, KeyAlgorithm alg, Clock clock);
  static CertificateAuthority create_intermediate(CertificateAuthority& parent,
                                                  const Options& opts, KeyAlgorithm alg,
                                                  Clock clock);

  // Persistence: <dir>/ca_cert.pem, <dir>/ca_key.pem (encrypted), <dir>/ca_state.json
  static CertificateAuthority load(const std::string& dir, const std::string& passphrase,
                                   Clock clock);
  void save(const std::string& dir, const std::string& passphrase) const;
  static bool exists(const std::string& dir);

  CertificateBundle issue(const Csr& csr, int validity_days, bool as_ca = false);
  // Renewal path: fresh serial and validity window for the same subject and
  // public key.
  CertificateBundle reissue(const Certificate& existing, int validity_days);

  RevocationList revoke(std::uint64_t serial);  // throws UnknownSerial; never un-revokes
  RevocationList current_crl() const;
  std::string crl_pem() const;

  const Certificate& certificate() const { return cert_; }
  const CertificateBundle& bundle() const { return bundle_; }
  const PrivateKey& key() const { return key_; }
  bool has_issued(std::uint64_t serial) const;

 private:
  CertificateAuthority(PrivateKey key, Certificate cert, CertificateBundle bundle, Clock clock)
      : key_(std::move(key)), cert_(std::move(cert)), bundle_(std::move(bundle)),
        clock_(std::move(clock)) {}

  Certificate sign_tbs(const DistinguishedName* subject, const Csr* csr, const PublicKey* pub,
                       int validity_days, bool as_ca, std::uint64_t serial);

  // Heap-allocated so the factory functions can move the authority.
  mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  PrivateKey key_;
  Certificate cert_;
  CertificateBundle bundle_;
  Clock clock_;
  std::uint64_t next_serial_ = 1;
  std::set<std::uint64_t> issued_;
  std::set<std::uint64_t> revoked_;
};

}  // namespace ans
