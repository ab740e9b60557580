#pragma once

#include <string>

#include <json.hpp>

namespace ans {

using Json = nlohmann::json;

// Deterministic byte encoding of a JSON document, used wherever bytes get
// signed or hashed (EndpointRecord data, renewal proofs, audit entries):
//   - object keys sorted lexicographically by UTF-8 bytes
//   - no insignificant whitespace
//   - UTF-8 output, only mandatory escapes
//   - numbers normalized: doubles with an integral value and magnitude below
//     2^53 emit as integers, everything else as the shortest round-trip form
//
// Throws AnsError(NonFiniteNumber) on NaN/infinity.
std::string canonicalize(const Json& body);

std::string sha256_hex(const std::string& data);

std::string base64_encode(const std::string& data);
std::string base64_decode(const std::string& text);  // throws on invalid input

}  // namespace ans
