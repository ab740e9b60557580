#include "ans/json_canon.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <openssl/evp.h>

#include "ans/errors.hpp"

namespace ans {

namespace {

void escape_string(const std::string& s, std::string& out) {
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

void emit_double(double d, std::string& out) {
  if (!std::isfinite(d))
    throw AnsError(ErrorCode::NonFiniteNumber, "non-finite number has no canonical form");
  if (std::trunc(d) == d && std::abs(d) < 9007199254740992.0 /* 2^53 */) {
    out += std::to_string(static_cast<std::int64_t>(d));
    return;
  }
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  out.append(buf, r.ptr);
}

void emit(const Json& v, std::string& out) {
  switch (v.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer:
      out += std::to_string(v.get<std::int64_t>());
      break;
    case Json::value_t::number_unsigned:
      out += std::to_string(v.get<std::uint64_t>());
      break;
    case Json::value_t::number_float:
      emit_double(v.get<double>(), out);
      break;
    case Json::value_t::string:
      escape_string(v.get<std::string>(), out);
      break;
    case Json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& e : v) {
        if (!first) out.push_back(',');
        first = false;
        emit(e, out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::object: {
      // nlohmann objects iterate in key order already; keep an explicit sort
      // so the guarantee does not hinge on the container choice
      std::map<std::string, const Json*> sorted;
      for (auto it = v.begin(); it != v.end(); ++it) sorted.emplace(it.key(), &it.value());
      out.push_back('{');
      bool first = true;
      for (const auto& [k, val] : sorted) {
        if (!first) out.push_back(',');
        first = false;
        escape_string(k, out);
        out.push_back(':');
        emit(*val, out);
      }
      out.push_back('}');
      break;
    }
    default:
      throw AnsError(ErrorCode::NonFiniteNumber, "unsupported JSON value type");
  }
}

}  // namespace

std::string canonicalize(const Json& body) {
  std::string out;
  out.reserve(256);
  emit(body, out);
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hexd = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hexd[digest[i] >> 4]);
    out.push_back(hexd[digest[i] & 0xf]);
  }
  return out;
}

std::string base64_encode(const std::string& data) {
  std::string out;
  out.resize(4 * ((data.size() + 2) / 3) + 1);
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(data.data()),
                          static_cast<int>(data.size()));
  out.resize(n);
  return out;
}

std::string base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length not a multiple of 4");
  std::string out;
  out.resize(3 * (text.size() / 4) + 1);
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw std::invalid_argument("invalid base64 input");
  size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

}  // namespace ans
