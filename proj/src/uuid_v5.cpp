#include "ans/uuid_v5.hpp"

#include <cstdio>
#include <stdexcept>

#include <openssl/evp.h>

namespace ans {

std::string Uuid::to_string() const {
  char buf[37];
  std::snprintf(buf, sizeof buf,
                "%02x%02x%02x%02x-%02x%02x-%02x%02x-%02x%02x-%02x%02x%02x%02x%02x%02x",
                bytes[0], bytes[1], bytes[2], bytes[3], bytes[4], bytes[5], bytes[6], bytes[7],
                bytes[8], bytes[9], bytes[10], bytes[11], bytes[12], bytes[13], bytes[14],
                bytes[15]);
  return buf;
}

Uuid Uuid::parse(const std::string& s) {
  Uuid u;
  if (s.size() != 36 || s[8] != '-' || s[13] != '-' || s[18] != '-' || s[23] != '-')
    throw std::invalid_argument("invalid UUID text: " + s);
  auto nyb = [&](char c) -> unsigned {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid UUID hex digit");
  };
  size_t bi = 0;
  for (size_t i = 0; i < s.size();) {
    if (s[i] == '-') {
      ++i;
      continue;
    }
    u.bytes[bi++] = static_cast<unsigned char>((nyb(s[i]) << 4) | nyb(s[i + 1]));
    i += 2;
  }
  return u;
}

Uuid uuid_v5(const Uuid& ns, const std::string& name) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, ns.bytes.data(), ns.bytes.size());
  EVP_DigestUpdate(ctx, name.data(), name.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);

  Uuid out;
  for (size_t i = 0; i < 16; ++i) out.bytes[i] = digest[i];
  out.bytes[6] = static_cast<unsigned char>((out.bytes[6] & 0x0f) | 0x50);  // version 5
  out.bytes[8] = static_cast<unsigned char>((out.bytes[8] & 0x3f) | 0x80);  // RFC 4122 variant
  return out;
}

const Uuid& ans_namespace_uuid() {
  static const Uuid ns = Uuid::parse("d826c80c-4e8a-5af4-a19b-f9465f5c67fe");
  return ns;
}

}  // namespace ans
