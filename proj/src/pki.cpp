#include "ans/pki.hpp"

#include <openssl/asn1.h>
#include <openssl/bio.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include <sys/stat.h>

#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ans/errors.hpp"
#include "ans/json_canon.hpp"

namespace ans {
namespace {

template <typename T>
struct ssl_delete;
#define ANS_DEFINE_DELETE(TYPE) \
  template <>                   \
  struct ssl_delete<TYPE> {     \
    void operator()(TYPE* p) {  \
      if (p) TYPE##_free(p);    \
    }                           \
  }
ANS_DEFINE_DELETE(BIO);
ANS_DEFINE_DELETE(EVP_PKEY);
ANS_DEFINE_DELETE(EVP_PKEY_CTX);
ANS_DEFINE_DELETE(EVP_MD_CTX);
ANS_DEFINE_DELETE(X509);
ANS_DEFINE_DELETE(X509_REQ);
ANS_DEFINE_DELETE(X509_NAME);
ANS_DEFINE_DELETE(X509_CRL);
ANS_DEFINE_DELETE(X509_REVOKED);
ANS_DEFINE_DELETE(X509_EXTENSION);
// ASN1_INTEGER and ASN1_TIME are typedefs of one underlying type.
ANS_DEFINE_DELETE(ASN1_STRING);
#undef ANS_DEFINE_DELETE

template <typename T>
using ssl_ptr = std::unique_ptr<T, ssl_delete<T>>;

[[noreturn]] void fail(ErrorCode code, const std::string& what) {
  unsigned long e = ERR_get_error();
  ERR_clear_error();
  if (e == 0) throw AnsError(code, what);
  char buf[256];
  ERR_error_string_n(e, buf, sizeof(buf));
  throw AnsError(code, what + ": " + buf);
}

std::string bio_to_string(BIO* bio) {
  char* data = nullptr;
  long len = BIO_get_mem_data(bio, &data);
  return std::string(data, data + (len > 0 ? len : 0));
}

ssl_ptr<BIO> string_to_bio(const std::string& s) {
  ssl_ptr<BIO> bio(BIO_new_mem_buf(s.data(), static_cast<int>(s.size())));
  if (!bio) fail(ErrorCode::StoreError, "BIO_new_mem_buf");
  return bio;
}

KeyAlgorithm algorithm_of(EVP_PKEY* pkey) {
  int id = EVP_PKEY_get_base_id(pkey);
  if (id == EVP_PKEY_ED25519) return KeyAlgorithm::Ed25519;
  if (id == EVP_PKEY_EC) return KeyAlgorithm::EcdsaP256Sha256;
  throw AnsError(ErrorCode::UnsupportedAlgorithm,
                 "key type id " + std::to_string(id) + " is not ed25519 or ecdsa-p256");
}

ssl_ptr<ASN1_TIME> asn1_time_from_unix(std::int64_t unix_seconds) {
  ssl_ptr<ASN1_TIME> t(ASN1_TIME_new());
  if (!t || !ASN1_TIME_set(t.get(), static_cast<time_t>(unix_seconds)))
    fail(ErrorCode::StoreError, "ASN1_TIME_set");
  return t;
}

std::int64_t asn1_time_to_unix(const ASN1_TIME* t) {
  std::tm tm{};
  if (!ASN1_TIME_to_tm(t, &tm)) fail(ErrorCode::StoreError, "ASN1_TIME_to_tm");
  return static_cast<std::int64_t>(timegm(&tm));
}

std::string name_entry(X509_NAME* name, int nid) {
  int idx = X509_NAME_get_index_by_NID(name, nid, -1);
  if (idx < 0) return "";
  X509_NAME_ENTRY* entry = X509_NAME_get_entry(name, idx);
  ASN1_STRING* data = X509_NAME_ENTRY_get_data(entry);
  unsigned char* utf8 = nullptr;
  int len = ASN1_STRING_to_UTF8(&utf8, data);
  if (len < 0) return "";
  std::string out(reinterpret_cast<char*>(utf8), static_cast<size_t>(len));
  OPENSSL_free(utf8);
  return out;
}

DistinguishedName dn_from_x509_name(X509_NAME* name) {
  DistinguishedName dn;
  dn.common_name = name_entry(name, NID_commonName);
  dn.organizational_unit = name_entry(name, NID_organizationalUnitName);
  dn.organization = name_entry(name, NID_organizationName);
  return dn;
}

ssl_ptr<X509_NAME> dn_to_x509_name(const DistinguishedName& dn) {
  ssl_ptr<X509_NAME> name(X509_NAME_new());
  if (!name) fail(ErrorCode::StoreError, "X509_NAME_new");
  auto add = [&](const char* field, const std::string& value) {
    if (value.empty()) return;
    if (!X509_NAME_add_entry_by_txt(name.get(), field, MBSTRING_UTF8,
                                    reinterpret_cast<const unsigned char*>(value.data()),
                                    static_cast<int>(value.size()), -1, 0))
      fail(ErrorCode::StoreError, std::string("X509_NAME_add_entry_by_txt ") + field);
  };
  add("O", dn.organization);
  add("OU", dn.organizational_unit);
  add("CN", dn.common_name);
  return name;
}

std::string x509_name_oneline(X509_NAME* name) {
  char* line = X509_NAME_oneline(name, nullptr, 0);
  std::string out = line ? line : "";
  OPENSSL_free(line);
  return out;
}

// Ed25519 signs the message directly; ECDSA hashes with SHA-256 first.
const EVP_MD* digest_for(KeyAlgorithm alg) {
  return alg == KeyAlgorithm::Ed25519 ? nullptr : EVP_sha256();
}

void add_extension(X509* cert, X509* issuer, int nid, const char* value) {
  X509V3_CTX ctx;
  X509V3_set_ctx_nodb(&ctx);
  X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
  ssl_ptr<X509_EXTENSION> ext(X509V3_EXT_conf_nid(nullptr, &ctx, nid, value));
  if (!ext) fail(ErrorCode::StoreError, "X509V3_EXT_conf_nid");
  if (!X509_add_ext(cert, ext.get(), -1)) fail(ErrorCode::StoreError, "X509_add_ext");
}

std::uint64_t serial_of(X509* cert) {
  const ASN1_INTEGER* serial = X509_get0_serialNumber(cert);
  std::uint64_t value = 0;
  if (!ASN1_INTEGER_get_uint64(&value, serial))
    throw AnsError(ErrorCode::UnknownSerial, "certificate serial does not fit in uint64");
  return value;
}

bool names_equal(X509_NAME* a, X509_NAME* b) { return X509_NAME_cmp(a, b) == 0; }

void write_private_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw AnsError(ErrorCode::StoreError, "cannot open " + path + " for writing");
    out << content;
  }
  ::chmod(path.c_str(), 0600);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnsError(ErrorCode::StoreError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const char* key_algorithm_name(KeyAlgorithm alg) {
  switch (alg) {
    case KeyAlgorithm::Ed25519:
      return "ed25519";
    case KeyAlgorithm::EcdsaP256Sha256:
      return "ecdsa-p256-sha256";
  }
  return "unknown";
}

KeyAlgorithm key_algorithm_from_string(const std::string& name) {
  if (name == "ed25519") return KeyAlgorithm::Ed25519;
  if (name == "ecdsa-p256-sha256" || name == "ecdsa-p256") return KeyAlgorithm::EcdsaP256Sha256;
  throw AnsError(ErrorCode::UnsupportedAlgorithm, "unsupported key algorithm: " + name);
}

// ---------- PrivateKey ----------

PrivateKey PrivateKey::generate(KeyAlgorithm alg) {
  EVP_PKEY* raw = nullptr;
  if (alg == KeyAlgorithm::Ed25519) {
    ssl_ptr<EVP_PKEY_CTX> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr));
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) <= 0 || EVP_PKEY_keygen(ctx.get(), &raw) <= 0)
      fail(ErrorCode::StoreError, "ed25519 keygen");
  } else {
    raw = EVP_PKEY_Q_keygen(nullptr, nullptr, "EC", "P-256");
    if (!raw) fail(ErrorCode::StoreError, "ecdsa-p256 keygen");
  }
  return PrivateKey(std::shared_ptr<EVP_PKEY>(raw, ssl_delete<EVP_PKEY>{}));
}

PrivateKey PrivateKey::generate(const std::string& alg_name) {
  return generate(key_algorithm_from_string(alg_name));
}

PrivateKey PrivateKey::from_pem(const std::string& pem, const std::string& passphrase) {
  auto bio = string_to_bio(pem);
  EVP_PKEY* raw = PEM_read_bio_PrivateKey(
      bio.get(), nullptr, nullptr,
      passphrase.empty() ? nullptr : const_cast<char*>(passphrase.c_str()));
  if (!raw) fail(ErrorCode::ConfigError, "cannot parse private key PEM");
  return PrivateKey(std::shared_ptr<EVP_PKEY>(raw, ssl_delete<EVP_PKEY>{}));
}

PrivateKey PrivateKey::load_pem_file(const std::string& path, const std::string& passphrase) {
  return from_pem(read_file(path), passphrase);
}

std::string PrivateKey::to_pem(const std::string& passphrase) const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  const EVP_CIPHER* cipher = passphrase.empty() ? nullptr : EVP_aes_256_cbc();
  if (!PEM_write_bio_PrivateKey(bio.get(), pkey_.get(), cipher,
                                passphrase.empty()
                                    ? nullptr
                                    : reinterpret_cast<const unsigned char*>(passphrase.data()),
                                static_cast<int>(passphrase.size()), nullptr, nullptr))
    fail(ErrorCode::StoreError, "PEM_write_bio_PrivateKey");
  return bio_to_string(bio.get());
}

void PrivateKey::save_pem_file(const std::string& path, const std::string& passphrase) const {
  write_private_file(path, to_pem(passphrase));
}

KeyAlgorithm PrivateKey::algorithm() const { return algorithm_of(pkey_.get()); }

std::string PrivateKey::public_key_pem() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_PUBKEY(bio.get(), pkey_.get()))
    fail(ErrorCode::StoreError, "PEM_write_bio_PUBKEY");
  return bio_to_string(bio.get());
}

std::string PrivateKey::public_key_der() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!i2d_PUBKEY_bio(bio.get(), pkey_.get())) fail(ErrorCode::StoreError, "i2d_PUBKEY_bio");
  return bio_to_string(bio.get());
}

// ---------- PublicKey ----------

PublicKey PublicKey::from_pem(const std::string& pem) {
  auto bio = string_to_bio(pem);
  EVP_PKEY* raw = PEM_read_bio_PUBKEY(bio.get(), nullptr, nullptr, nullptr);
  if (!raw) fail(ErrorCode::ConfigError, "cannot parse public key PEM");
  return PublicKey(std::shared_ptr<EVP_PKEY>(raw, ssl_delete<EVP_PKEY>{}));
}

PublicKey PublicKey::from_der(const std::string& der) {
  auto bio = string_to_bio(der);
  EVP_PKEY* raw = d2i_PUBKEY_bio(bio.get(), nullptr);
  if (!raw) fail(ErrorCode::ConfigError, "cannot parse public key DER");
  return PublicKey(std::shared_ptr<EVP_PKEY>(raw, ssl_delete<EVP_PKEY>{}));
}

std::string PublicKey::to_pem() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_PUBKEY(bio.get(), pkey_.get()))
    fail(ErrorCode::StoreError, "PEM_write_bio_PUBKEY");
  return bio_to_string(bio.get());
}

std::string PublicKey::to_der() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!i2d_PUBKEY_bio(bio.get(), pkey_.get())) fail(ErrorCode::StoreError, "i2d_PUBKEY_bio");
  return bio_to_string(bio.get());
}

KeyAlgorithm PublicKey::algorithm() const { return algorithm_of(pkey_.get()); }

// ---------- sign / verify ----------

Signature sign(const std::string& data, const PrivateKey& key) {
  KeyAlgorithm alg = key.algorithm();
  ssl_ptr<EVP_MD_CTX> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, digest_for(alg), nullptr, key.handle()) <= 0)
    fail(ErrorCode::StoreError, "EVP_DigestSignInit");
  size_t len = 0;
  const auto* msg = reinterpret_cast<const unsigned char*>(data.data());
  if (EVP_DigestSign(ctx.get(), nullptr, &len, msg, data.size()) <= 0)
    fail(ErrorCode::StoreError, "EVP_DigestSign (size)");
  std::string sig(len, '\0');
  if (EVP_DigestSign(ctx.get(), reinterpret_cast<unsigned char*>(sig.data()), &len, msg,
                     data.size()) <= 0)
    fail(ErrorCode::StoreError, "EVP_DigestSign");
  sig.resize(len);
  return Signature{alg, std::move(sig)};
}

bool verify_signature(const std::string& data, const Signature& sig, const PublicKey& pub) {
  KeyAlgorithm key_alg;
  try {
    key_alg = pub.algorithm();
  } catch (const AnsError&) {
    return false;
  }
  if (key_alg != sig.algorithm) return false;
  ssl_ptr<EVP_MD_CTX> ctx(EVP_MD_CTX_new());
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, digest_for(sig.algorithm), nullptr, pub.handle()) <=
          0) {
    ERR_clear_error();
    return false;
  }
  int rc = EVP_DigestVerify(ctx.get(),
                            reinterpret_cast<const unsigned char*>(sig.bytes.data()),
                            sig.bytes.size(),
                            reinterpret_cast<const unsigned char*>(data.data()), data.size());
  ERR_clear_error();
  return rc == 1;
}

// ---------- DistinguishedName ----------

DistinguishedName DistinguishedName::for_agent(const ANSName& name) {
  return DistinguishedName{name.agent_id, name.capability, name.provider};
}

std::string DistinguishedName::to_string() const {
  return "CN=" + common_name + ",OU=" + organizational_unit + ",O=" + organization;
}

// ---------- Csr ----------

Csr Csr::create(const PrivateKey& key, const DistinguishedName& subject) {
  ssl_ptr<X509_REQ> req(X509_REQ_new());
  if (!req) fail(ErrorCode::StoreError, "X509_REQ_new");
  X509_REQ_set_version(req.get(), 0);
  auto name = dn_to_x509_name(subject);
  if (!X509_REQ_set_subject_name(req.get(), name.get()))
    fail(ErrorCode::StoreError, "X509_REQ_set_subject_name");
  if (!X509_REQ_set_pubkey(req.get(), key.handle()))
    fail(ErrorCode::StoreError, "X509_REQ_set_pubkey");
  if (X509_REQ_sign(req.get(), key.handle(), digest_for(key.algorithm())) <= 0)
    fail(ErrorCode::StoreError, "X509_REQ_sign");
  return Csr(std::shared_ptr<X509_REQ>(req.release(), ssl_delete<X509_REQ>{}));
}

Csr Csr::from_pem(const std::string& pem) {
  auto bio = string_to_bio(pem);
  X509_REQ* raw = PEM_read_bio_X509_REQ(bio.get(), nullptr, nullptr, nullptr);
  if (!raw) fail(ErrorCode::InvalidCsr, "cannot parse CSR PEM");
  return Csr(std::shared_ptr<X509_REQ>(raw, ssl_delete<X509_REQ>{}));
}

std::string Csr::pem() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_X509_REQ(bio.get(), req_.get()))
    fail(ErrorCode::StoreError, "PEM_write_bio_X509_REQ");
  return bio_to_string(bio.get());
}

bool Csr::self_signature_valid() const {
  ssl_ptr<EVP_PKEY> pub(X509_REQ_get_pubkey(req_.get()));
  if (!pub) {
    ERR_clear_error();
    return false;
  }
  int rc = X509_REQ_verify(req_.get(), pub.get());
  ERR_clear_error();
  return rc == 1;
}

DistinguishedName Csr::subject() const {
  return dn_from_x509_name(X509_REQ_get_subject_name(req_.get()));
}

PublicKey Csr::public_key() const {
  EVP_PKEY* raw = X509_REQ_get_pubkey(req_.get());
  if (!raw) fail(ErrorCode::InvalidCsr, "CSR has no public key");
  return PublicKey(std::shared_ptr<EVP_PKEY>(raw, ssl_delete<EVP_PKEY>{}));
}

// ---------- Certificate ----------

Certificate Certificate::from_pem(const std::string& pem) {
  auto bio = string_to_bio(pem);
  X509* raw = PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr);
  if (!raw) fail(ErrorCode::ConfigError, "cannot parse certificate PEM");
  return Certificate(std::shared_ptr<X509>(raw, ssl_delete<X509>{}));
}

std::string Certificate::pem() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_X509(bio.get(), cert_.get())) fail(ErrorCode::StoreError, "PEM_write_bio_X509");
  return bio_to_string(bio.get());
}

std::string Certificate::der() const {
  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!i2d_X509_bio(bio.get(), cert_.get())) fail(ErrorCode::StoreError, "i2d_X509_bio");
  return bio_to_string(bio.get());
}

std::uint64_t Certificate::serial() const { return serial_of(cert_.get()); }

std::string Certificate::subject() const {
  return x509_name_oneline(X509_get_subject_name(cert_.get()));
}

std::string Certificate::issuer() const {
  return x509_name_oneline(X509_get_issuer_name(cert_.get()));
}

PublicKey Certificate::public_key() const {
  EVP_PKEY* raw = X509_get_pubkey(cert_.get());
  if (!raw) fail(ErrorCode::ConfigError, "certificate has no public key");
  return PublicKey(std::shared_ptr<EVP_PKEY>(raw, ssl_delete<EVP_PKEY>{}));
}

std::int64_t Certificate::not_before_unix() const {
  return asn1_time_to_unix(X509_get0_notBefore(cert_.get()));
}

std::int64_t Certificate::not_after_unix() const {
  return asn1_time_to_unix(X509_get0_notAfter(cert_.get()));
}

bool Certificate::is_self_signed() const {
  return names_equal(X509_get_subject_name(cert_.get()), X509_get_issuer_name(cert_.get()));
}

// ---------- CertificateBundle ----------

CertificateBundle CertificateBundle::from_pem(const std::string& concatenated_pem) {
  static const std::string kBegin = "-----BEGIN CERTIFICATE-----";
  static const std::string kEnd = "-----END CERTIFICATE-----";
  CertificateBundle bundle;
  size_t pos = 0;
  while (true) {
    size_t b = concatenated_pem.find(kBegin, pos);
    if (b == std::string::npos) break;
    size_t e = concatenated_pem.find(kEnd, b);
    if (e == std::string::npos)
      throw AnsError(ErrorCode::ConfigError, "truncated certificate PEM block");
    e += kEnd.size();
    std::string block = concatenated_pem.substr(b, e - b) + "\n";
    if (bundle.leaf_pem.empty())
      bundle.leaf_pem = block;
    else
      bundle.chain_pems.push_back(block);
    pos = e;
  }
  if (bundle.leaf_pem.empty())
    throw AnsError(ErrorCode::ConfigError, "no certificate blocks in PEM input");
  return bundle;
}

std::string CertificateBundle::to_pem() const {
  std::string out = leaf_pem;
  for (const auto& c : chain_pems) out += c;
  return out;
}

std::vector<Certificate> CertificateBundle::chain() const {
  std::vector<Certificate> out;
  out.reserve(chain_pems.size());
  for (const auto& c : chain_pems) out.push_back(Certificate::from_pem(c));
  return out;
}

// ---------- CRL ----------

const char* chain_status_name(ChainStatus s) {
  switch (s) {
    case ChainStatus::Ok:
      return "Ok";
    case ChainStatus::Revoked:
      return "Revoked";
    case ChainStatus::Expired:
      return "Expired";
    case ChainStatus::UntrustedRoot:
      return "UntrustedRoot";
    case ChainStatus::BadSignature:
      return "BadSignature";
  }
  return "Unknown";
}

RevocationList parse_crl_pem(const std::string& pem) {
  auto bio = string_to_bio(pem);
  ssl_ptr<X509_CRL> crl(PEM_read_bio_X509_CRL(bio.get(), nullptr, nullptr, nullptr));
  if (!crl) fail(ErrorCode::ConfigError, "cannot parse CRL PEM");
  RevocationList out;
  out.issuer = x509_name_oneline(X509_CRL_get_issuer(crl.get()));
  if (const ASN1_TIME* lu = X509_CRL_get0_lastUpdate(crl.get())) out.issued_at = asn1_time_to_unix(lu);
  if (const ASN1_TIME* nu = X509_CRL_get0_nextUpdate(crl.get()))
    out.next_update = asn1_time_to_unix(nu);
  STACK_OF(X509_REVOKED)* revoked = X509_CRL_get_REVOKED(crl.get());
  for (int i = 0; i < sk_X509_REVOKED_num(revoked); ++i) {
    X509_REVOKED* entry = sk_X509_REVOKED_value(revoked, i);
    std::uint64_t serial = 0;
    if (ASN1_INTEGER_get_uint64(&serial, X509_REVOKED_get0_serialNumber(entry)))
      out.revoked.insert(serial);
  }
  return out;
}

// ---------- chain verification ----------

namespace {

bool within_validity(X509* cert, std::int64_t now) {
  time_t t = static_cast<time_t>(now);
  // X509_cmp_time: -1 when the ASN1 time is before or equal to t.
  if (X509_cmp_time(X509_get0_notBefore(cert), &t) > 0) return false;  // not yet valid
  if (X509_cmp_time(X509_get0_notAfter(cert), &t) < 0) return false;   // expired
  return true;
}

bool signed_by(X509* cert, X509* issuer) {
  ssl_ptr<EVP_PKEY> pub(X509_get_pubkey(issuer));
  if (!pub) {
    ERR_clear_error();
    return false;
  }
  int rc = X509_verify(cert, pub.get());
  ERR_clear_error();
  return rc == 1;
}

}  // namespace

ChainResult verify_cert_chain(const CertificateBundle& bundle, const Certificate& trusted_ca,
                              const RevocationList& crl,
                              std::chrono::system_clock::time_point at) {
  std::int64_t now = to_unix_seconds(at);

  std::vector<Certificate> certs;
  try {
    certs.push_back(bundle.leaf());
    for (auto& c : bundle.chain()) certs.push_back(std::move(c));
  } catch (const AnsError& e) {
    return {ChainStatus::BadSignature, std::string("unparseable certificate: ") + e.what()};
  }

  // Anchor checks: the anchor itself must be current and un-revoked.
  if (!within_validity(trusted_ca.handle(), now))
    return {ChainStatus::Expired, "trust anchor outside validity window"};

  for (size_t i = 0; i < certs.size(); ++i) {
    Certificate& cert = certs[i];
    if (!within_validity(cert.handle(), now))
      return {ChainStatus::Expired, "certificate expired or not yet valid: " + cert.subject()};
    std::uint64_t serial = 0;
    try {
      serial = cert.serial();
    } catch (const AnsError&) {
      return {ChainStatus::BadSignature, "unreadable serial: " + cert.subject()};
    }
    if (crl.contains(serial))
      return {ChainStatus::Revoked,
              "serial " + std::to_string(serial) + " is revoked: " + cert.subject()};

    // Signed directly by the anchor: the walk terminates here.
    if (names_equal(X509_get_issuer_name(cert.handle()),
                    X509_get_subject_name(trusted_ca.handle()))) {
      if (!signed_by(cert.handle(), trusted_ca.handle()))
        return {ChainStatus::BadSignature, "anchor signature check failed: " + cert.subject()};
      return {ChainStatus::Ok, ""};
    }

    if (i + 1 >= certs.size())
      return {ChainStatus::UntrustedRoot,
              "chain does not terminate at the trust anchor: " + cert.issuer()};

    Certificate& issuer = certs[i + 1];
    if (!names_equal(X509_get_issuer_name(cert.handle()),
                     X509_get_subject_name(issuer.handle())))
      return {ChainStatus::UntrustedRoot, "broken issuer linkage at: " + cert.subject()};
    if (!signed_by(cert.handle(), issuer.handle()))
      return {ChainStatus::BadSignature, "issuer signature check failed: " + cert.subject()};
  }

  return {ChainStatus::UntrustedRoot, "chain does not reach the trust anchor"};
}

// ---------- CertificateAuthority ----------

Certificate CertificateAuthority::sign_tbs(const DistinguishedName* subject, const Csr* csr,
                                           const PublicKey* pub, int validity_days, bool as_ca,
                                           std::uint64_t serial) {
  ssl_ptr<X509> cert(X509_new());
  if (!cert) fail(ErrorCode::StoreError, "X509_new");
  X509_set_version(cert.get(), 2);

  ssl_ptr<ASN1_INTEGER> serial_asn1(ASN1_INTEGER_new());
  if (!serial_asn1 || !ASN1_INTEGER_set_uint64(serial_asn1.get(), serial))
    fail(ErrorCode::StoreError, "ASN1_INTEGER_set_uint64");
  X509_set_serialNumber(cert.get(), serial_asn1.get());

  if (csr) {
    X509_set_subject_name(cert.get(), X509_REQ_get_subject_name(csr->handle()));
    ssl_ptr<EVP_PKEY> csr_pub(X509_REQ_get_pubkey(csr->handle()));
    X509_set_pubkey(cert.get(), csr_pub.get());
  } else {
    auto name = dn_to_x509_name(*subject);
    X509_set_subject_name(cert.get(), name.get());
    X509_set_pubkey(cert.get(), pub->handle());
  }

  // Self-issue when the CA has no certificate yet (root bootstrap).
  X509* issuer_x509 = cert_.handle() ? cert_.handle() : cert.get();
  X509_set_issuer_name(cert.get(), X509_get_subject_name(issuer_x509));

  std::int64_t now = to_unix_seconds(clock_());
  auto not_before = asn1_time_from_unix(now);
  auto not_after = asn1_time_from_unix(now + std::int64_t(validity_days) * 86400);
  X509_set1_notBefore(cert.get(), not_before.get());
  X509_set1_notAfter(cert.get(), not_after.get());

  add_extension(cert.get(), issuer_x509, NID_basic_constraints,
                as_ca ? "critical,CA:TRUE" : "critical,CA:FALSE");
  add_extension(cert.get(), issuer_x509, NID_key_usage,
                as_ca ? "critical,keyCertSign,cRLSign" : "critical,digitalSignature");
  add_extension(cert.get(), issuer_x509, NID_subject_key_identifier, "hash");

  if (X509_sign(cert.get(), key_.handle(), digest_for(key_.algorithm())) <= 0)
    fail(ErrorCode::StoreError, "X509_sign");
  return Certificate(std::shared_ptr<X509>(cert.release(), ssl_delete<X509>{}));
}

CertificateAuthority CertificateAuthority::create_root(const Options& opts, KeyAlgorithm alg,
                                                       Clock clock) {
  PrivateKey key = PrivateKey::generate(alg);
  Certificate placeholder{std::shared_ptr<X509>{}};
  CertificateAuthority ca(std::move(key), std::move(placeholder), CertificateBundle{}, clock);
  DistinguishedName dn{opts.name, "", "ANS"};
  PublicKey pub = PublicKey::from_der(ca.key_.public_key_der());
  ca.cert_ = ca.sign_tbs(&dn, nullptr, &pub, opts.validity_days, true, 0);
  ca.bundle_ = CertificateBundle{ca.cert_.pem(), {}};
  return ca;
}

CertificateAuthority CertificateAuthority::create_intermediate(CertificateAuthority& parent,
                                                               const Options& opts,
                                                               KeyAlgorithm alg, Clock clock) {
  PrivateKey key = PrivateKey::generate(alg);
  Csr csr = Csr::create(key, DistinguishedName{opts.name, "", "ANS"});
  CertificateBundle issued = parent.issue(csr, opts.validity_days, true);
  Certificate cert = issued.leaf();
  CertificateAuthority ca(std::move(key), std::move(cert), issued, clock);
  return ca;
}

CertificateBundle CertificateAuthority::issue(const Csr& csr, int validity_days, bool as_ca) {
  if (!csr.self_signature_valid())
    throw AnsError(ErrorCode::InvalidCsr, "CSR self-signature verification failed");
  std::lock_guard<std::mutex> lock(*mu_);
  std::uint64_t serial = next_serial_++;
  Certificate cert = sign_tbs(nullptr, &csr, nullptr, validity_days, as_ca, serial);
  issued_.insert(serial);
  CertificateBundle out;
  out.leaf_pem = cert.pem();
  out.chain_pems.push_back(cert_.pem());
  for (const auto& c : bundle_.chain_pems) out.chain_pems.push_back(c);
  return out;
}

CertificateBundle CertificateAuthority::reissue(const Certificate& existing, int validity_days) {
  std::lock_guard<std::mutex> lock(*mu_);
  std::uint64_t serial = next_serial_++;
  DistinguishedName dn = dn_from_x509_name(X509_get_subject_name(existing.handle()));
  PublicKey pub = existing.public_key();
  Certificate cert = sign_tbs(&dn, nullptr, &pub, validity_days, false, serial);
  issued_.insert(serial);
  CertificateBundle out;
  out.leaf_pem = cert.pem();
  out.chain_pems.push_back(cert_.pem());
  for (const auto& c : bundle_.chain_pems) out.chain_pems.push_back(c);
  return out;
}

RevocationList CertificateAuthority::revoke(std::uint64_t serial) {
  std::lock_guard<std::mutex> lock(*mu_);
  if (issued_.count(serial) == 0)
    throw AnsError(ErrorCode::UnknownSerial,
                   "serial " + std::to_string(serial) + " was not issued by this CA");
  revoked_.insert(serial);
  RevocationList out;
  out.issuer = cert_.subject();
  out.revoked = revoked_;
  out.issued_at = to_unix_seconds(clock_());
  out.next_update = out.issued_at + 86400;
  return out;
}

RevocationList CertificateAuthority::current_crl() const {
  std::lock_guard<std::mutex> lock(*mu_);
  RevocationList out;
  out.issuer = cert_.subject();
  out.revoked = revoked_;
  out.issued_at = to_unix_seconds(clock_());
  out.next_update = out.issued_at + 86400;
  return out;
}

bool CertificateAuthority::has_issued(std::uint64_t serial) const {
  std::lock_guard<std::mutex> lock(*mu_);
  return issued_.count(serial) != 0;
}

std::string CertificateAuthority::crl_pem() const {
  std::lock_guard<std::mutex> lock(*mu_);
  ssl_ptr<X509_CRL> crl(X509_CRL_new());
  if (!crl) fail(ErrorCode::StoreError, "X509_CRL_new");
  X509_CRL_set_version(crl.get(), 1);
  X509_CRL_set_issuer_name(crl.get(), X509_get_subject_name(cert_.handle()));

  std::int64_t now = to_unix_seconds(clock_());
  auto last_update = asn1_time_from_unix(now);
  auto next_update = asn1_time_from_unix(now + 86400);
  X509_CRL_set1_lastUpdate(crl.get(), last_update.get());
  X509_CRL_set1_nextUpdate(crl.get(), next_update.get());

  for (std::uint64_t serial : revoked_) {
    ssl_ptr<X509_REVOKED> entry(X509_REVOKED_new());
    ssl_ptr<ASN1_INTEGER> serial_asn1(ASN1_INTEGER_new());
    ASN1_INTEGER_set_uint64(serial_asn1.get(), serial);
    X509_REVOKED_set_serialNumber(entry.get(), serial_asn1.get());
    auto when = asn1_time_from_unix(now);
    X509_REVOKED_set_revocationDate(entry.get(), when.get());
    if (!X509_CRL_add0_revoked(crl.get(), entry.get()))
      fail(ErrorCode::StoreError, "X509_CRL_add0_revoked");
    entry.release();  // owned by the CRL now
  }
  X509_CRL_sort(crl.get());
  if (X509_CRL_sign(crl.get(), key_.handle(), digest_for(key_.algorithm())) <= 0)
    fail(ErrorCode::StoreError, "X509_CRL_sign");

  ssl_ptr<BIO> bio(BIO_new(BIO_s_mem()));
  if (!PEM_write_bio_X509_CRL(bio.get(), crl.get()))
    fail(ErrorCode::StoreError, "PEM_write_bio_X509_CRL");
  return bio_to_string(bio.get());
}

void CertificateAuthority::save(const std::string& dir, const std::string& passphrase) const {
  std::lock_guard<std::mutex> lock(*mu_);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/ca_cert.pem", std::ios::binary | std::ios::trunc);
    out << bundle_.to_pem();
  }
  write_private_file(dir + "/ca_key.pem", key_.to_pem(passphrase));
  Json state;
  state["nextSerial"] = next_serial_;
  state["issued"] = Json::array();
  for (auto s : issued_) state["issued"].push_back(s);
  state["revoked"] = Json::array();
  for (auto s : revoked_) state["revoked"].push_back(s);
  std::ofstream out(dir + "/ca_state.json", std::ios::binary | std::ios::trunc);
  out << state.dump(2) << "\n";
}

bool CertificateAuthority::exists(const std::string& dir) {
  return std::filesystem::exists(dir + "/ca_cert.pem") &&
         std::filesystem::exists(dir + "/ca_key.pem");
}

CertificateAuthority CertificateAuthority::load(const std::string& dir,
                                                const std::string& passphrase, Clock clock) {
  PrivateKey key = PrivateKey::load_pem_file(dir + "/ca_key.pem", passphrase);
  CertificateBundle bundle = CertificateBundle::from_pem(read_file(dir + "/ca_cert.pem"));
  Certificate cert = bundle.leaf();
  CertificateAuthority ca(std::move(key), std::move(cert), std::move(bundle), clock);
  if (std::filesystem::exists(dir + "/ca_state.json")) {
    Json state = Json::parse(read_file(dir + "/ca_state.json"));
    ca.next_serial_ = state.value("nextSerial", std::uint64_t{1});
    for (const auto& s : state.value("issued", Json::array())) ca.issued_.insert(s.get<std::uint64_t>());
    for (const auto& s : state.value("revoked", Json::array()))
      ca.revoked_.insert(s.get<std::uint64_t>());
  }
  return ca;
}

}  // namespace ans
