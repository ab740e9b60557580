#include "ans/schema_registry.hpp"

#include <fstream>
#include <sstream>

#include "ans/errors.hpp"

namespace ans {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnsError(ErrorCode::ConfigError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pointer_escape(const std::string& token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

const char* json_type_name(const Json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

bool type_matches(const std::string& want, const Json& v) {
  if (want == "null") return v.is_null();
  if (want == "boolean") return v.is_boolean();
  if (want == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (want == "number") return v.is_number();
  if (want == "string") return v.is_string();
  if (want == "array") return v.is_array();
  if (want == "object") return v.is_object();
  return false;
}

size_t utf8_length(const std::string& s) {
  size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

using PatternCache = std::map<std::string, std::regex>;

const std::regex& pattern_for(const std::string& pattern, const PatternCache* cache,
                              PatternCache& scratch) {
  if (cache) {
    auto it = cache->find(pattern);
    if (it != cache->end()) return it->second;
  }
  auto it = scratch.find(pattern);
  if (it == scratch.end())
    it = scratch.emplace(pattern, std::regex(pattern, std::regex::ECMAScript)).first;
  return it->second;
}

void walk(const Json& schema, const Json& v, const std::string& path, ValidationReport& out,
          const PatternCache* cache, PatternCache& scratch) {
  if (schema.is_boolean()) {
    if (!schema.get<bool>()) out.add(path, "schema forbids any value here");
    return;
  }
  if (!schema.is_object()) return;

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = type_matches(it->get<std::string>(), v);
    } else if (it->is_array()) {
      for (const auto& t : *it)
        if (t.is_string() && type_matches(t.get<std::string>(), v)) {
          ok = true;
          break;
        }
    }
    if (!ok) {
      out.add(path, std::string("expected type ") + it->dump() + ", got " + json_type_name(v));
      return;  // further keyword checks would only produce noise
    }
  }

  if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    bool ok = false;
    for (const auto& candidate : *it)
      if (candidate == v) {
        ok = true;
        break;
      }
    if (!ok) out.add(path, "value not in enum " + it->dump());
  }

  if (auto it = schema.find("const"); it != schema.end()) {
    if (*it != v) out.add(path, "value differs from const " + it->dump());
  }

  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (auto it = schema.find("pattern"); it != schema.end() && it->is_string()) {
      const std::string& pat = it->get_ref<const std::string&>();
      try {
        if (!std::regex_search(s, pattern_for(pat, cache, scratch)))
          out.add(path, "string does not match pattern " + pat);
      } catch (const std::regex_error&) {
        out.add(path, "unsupported pattern " + pat);
      }
    }
    if (auto it = schema.find("minLength"); it != schema.end() && it->is_number())
      if (utf8_length(s) < it->get<size_t>())
        out.add(path, "string shorter than minLength " + it->dump());
    if (auto it = schema.find("maxLength"); it != schema.end() && it->is_number())
      if (utf8_length(s) > it->get<size_t>())
        out.add(path, "string longer than maxLength " + it->dump());
  }

  if (v.is_number()) {
    double d = v.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && it->is_number())
      if (d < it->get<double>()) out.add(path, "value below minimum " + it->dump());
    if (auto it = schema.find("maximum"); it != schema.end() && it->is_number())
      if (d > it->get<double>()) out.add(path, "value above maximum " + it->dump());
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && it->is_number())
      if (d <= it->get<double>()) out.add(path, "value not above exclusiveMinimum " + it->dump());
    if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && it->is_number())
      if (d >= it->get<double>()) out.add(path, "value not below exclusiveMaximum " + it->dump());
  }

  if (v.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && it->is_number())
      if (v.size() < it->get<size_t>()) out.add(path, "fewer items than minItems " + it->dump());
    if (auto it = schema.find("maxItems"); it != schema.end() && it->is_number())
      if (v.size() > it->get<size_t>()) out.add(path, "more items than maxItems " + it->dump());
    if (auto it = schema.find("items"); it != schema.end()) {
      if (it->is_array()) {
        for (size_t i = 0; i < v.size() && i < it->size(); ++i)
          walk((*it)[i], v[i], path + "/" + std::to_string(i), out, cache, scratch);
      } else {
        for (size_t i = 0; i < v.size(); ++i)
          walk(*it, v[i], path + "/" + std::to_string(i), out, cache, scratch);
      }
    }
  }

  if (v.is_object()) {
    if (auto it = schema.find("required"); it != schema.end() && it->is_array()) {
      for (const auto& key : *it) {
        if (!key.is_string()) continue;
        const std::string& k = key.get_ref<const std::string&>();
        if (!v.contains(k)) out.add(path + "/" + pointer_escape(k), "missing required property");
      }
    }
    const Json* properties = nullptr;
    if (auto it = schema.find("properties"); it != schema.end() && it->is_object())
      properties = &*it;
    if (properties) {
      for (auto it = properties->begin(); it != properties->end(); ++it) {
        if (v.contains(it.key()))
          walk(it.value(), v.at(it.key()), path + "/" + pointer_escape(it.key()), out, cache,
               scratch);
      }
    }
    if (auto it = schema.find("additionalProperties"); it != schema.end()) {
      for (auto vit = v.begin(); vit != v.end(); ++vit) {
        if (properties && properties->contains(vit.key())) continue;
        std::string child = path + "/" + pointer_escape(vit.key());
        if (it->is_boolean()) {
          if (!it->get<bool>()) out.add(child, "additional property not allowed");
        } else {
          walk(*it, vit.value(), child, out, cache, scratch);
        }
      }
    }
  }
}

void collect_patterns(const Json& schema, PatternCache& into) {
  if (schema.is_object()) {
    if (auto it = schema.find("pattern"); it != schema.end() && it->is_string()) {
      const std::string& pat = it->get_ref<const std::string&>();
      if (!into.count(pat)) into.emplace(pat, std::regex(pat, std::regex::ECMAScript));
    }
    for (const auto& child : schema) collect_patterns(child, into);
  } else if (schema.is_array()) {
    for (const auto& child : schema) collect_patterns(child, into);
  }
}

}  // namespace

std::string ValidationReport::to_string() const {
  if (valid) return "valid";
  std::string out;
  for (const auto& violation : violations) {
    if (!out.empty()) out += "; ";
    out += violation.path + ": " + violation.message;
  }
  return out;
}

const char* message_kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::RegistrationRequest:
      return "RegistrationRequest";
    case MessageKind::RegistrationResponse:
      return "RegistrationResponse";
    case MessageKind::RenewalRequest:
      return "RenewalRequest";
    case MessageKind::RenewalResponse:
      return "RenewalResponse";
    case MessageKind::CapabilityRequest:
      return "CapabilityRequest";
    case MessageKind::CapabilityResponse:
      return "CapabilityResponse";
  }
  return "Unknown";
}

MessageKind message_kind_from_string(const std::string& name) {
  static const std::map<std::string, MessageKind> kinds = {
      {"RegistrationRequest", MessageKind::RegistrationRequest},
      {"RegistrationResponse", MessageKind::RegistrationResponse},
      {"RenewalRequest", MessageKind::RenewalRequest},
      {"RenewalResponse", MessageKind::RenewalResponse},
      {"CapabilityRequest", MessageKind::CapabilityRequest},
      {"CapabilityResponse", MessageKind::CapabilityResponse},
  };
  auto it = kinds.find(name);
  if (it == kinds.end())
    throw AnsError(ErrorCode::UnknownKind, "unknown message kind: " + name);
  return it->second;
}

SchemaRegistry SchemaRegistry::load(const std::string& dir) {
  Json manifest;
  try {
    manifest = Json::parse(read_file(dir + "/manifest.json"));
  } catch (const Json::exception& e) {
    throw AnsError(ErrorCode::ConfigError, std::string("bad schema manifest: ") + e.what());
  }
  if (!manifest.contains("schemas") || !manifest["schemas"].is_object())
    throw AnsError(ErrorCode::ConfigError, "schema manifest missing \"schemas\" object");

  SchemaRegistry reg;
  auto patterns = std::make_shared<PatternCache>();
  for (auto it = manifest["schemas"].begin(); it != manifest["schemas"].end(); ++it) {
    MessageKind kind = message_kind_from_string(it.key());
    const Json& entry = it.value();
    std::string file = entry.at("file").get<std::string>();
    std::string want = entry.at("sha256").get<std::string>();
    std::string bytes = read_file(dir + "/" + file);
    std::string got = sha256_hex(bytes);
    if (got != want)
      throw AnsError(ErrorCode::ConfigError,
                     "schema pin mismatch for " + file + ": manifest " + want + ", file " + got);
    Json schema;
    try {
      schema = Json::parse(bytes);
    } catch (const Json::exception& e) {
      throw AnsError(ErrorCode::ConfigError, "unparseable schema " + file + ": " + e.what());
    }
    collect_patterns(schema, *patterns);
    reg.schemas_.emplace(kind, std::move(schema));
  }
  for (int k = 0; k <= static_cast<int>(MessageKind::CapabilityResponse); ++k) {
    if (!reg.schemas_.count(static_cast<MessageKind>(k)))
      throw AnsError(ErrorCode::ConfigError,
                     std::string("manifest missing schema for kind ") +
                         message_kind_name(static_cast<MessageKind>(k)));
  }
  reg.patterns_ = std::move(patterns);
  return reg;
}

const Json& SchemaRegistry::schema_for(MessageKind kind) const { return schemas_.at(kind); }

ValidationReport SchemaRegistry::validate(MessageKind kind, const Json& body) const {
  auto it = schemas_.find(kind);
  if (it == schemas_.end())
    throw AnsError(ErrorCode::UnknownKind,
                   std::string("no schema loaded for kind ") + message_kind_name(kind));
  ValidationReport report;
  PatternCache scratch;
  walk(it->second, body, "", report, patterns_.get(), scratch);
  return report;
}

ValidationReport SchemaRegistry::validate(const std::string& kind_name, const Json& body) const {
  return validate(message_kind_from_string(kind_name), body);
}

ValidationReport SchemaRegistry::validate_against(const Json& schema, const Json& instance) {
  ValidationReport report;
  PatternCache scratch;
  walk(schema, instance, "", report, nullptr, scratch);
  return report;
}

bool SchemaRegistry::looks_like_json_schema(const Json& doc, std::string* why) {
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (doc.is_boolean()) return true;
  if (!doc.is_object()) return fail("schema must be an object or boolean");
  static const char* kTypeNames[] = {"null", "boolean", "integer", "number",
                                     "string", "array", "object"};
  auto valid_type = [](const Json& t) {
    if (!t.is_string()) return false;
    for (const char* name : kTypeNames)
      if (t.get_ref<const std::string&>() == name) return true;
    return false;
  };
  if (auto it = doc.find("type"); it != doc.end()) {
    if (it->is_array()) {
      for (const auto& t : *it)
        if (!valid_type(t)) return fail("bad entry in type array: " + t.dump());
    } else if (!valid_type(*it)) {
      return fail("bad type keyword: " + it->dump());
    }
  }
  if (auto it = doc.find("properties"); it != doc.end()) {
    if (!it->is_object()) return fail("properties must be an object");
    for (auto pit = it->begin(); pit != it->end(); ++pit) {
      std::string child_why;
      if (!looks_like_json_schema(pit.value(), &child_why))
        return fail("properties/" + pit.key() + ": " + child_why);
    }
  }
  if (auto it = doc.find("required"); it != doc.end()) {
    if (!it->is_array()) return fail("required must be an array");
    for (const auto& k : *it)
      if (!k.is_string()) return fail("required entries must be strings");
  }
  if (auto it = doc.find("items"); it != doc.end()) {
    std::string child_why;
    if (it->is_array()) {
      for (const auto& s : *it)
        if (!looks_like_json_schema(s, &child_why)) return fail("items: " + child_why);
    } else if (!looks_like_json_schema(*it, &child_why)) {
      return fail("items: " + child_why);
    }
  }
  if (auto it = doc.find("enum"); it != doc.end())
    if (!it->is_array() || it->empty()) return fail("enum must be a non-empty array");
  if (auto it = doc.find("pattern"); it != doc.end()) {
    if (!it->is_string()) return fail("pattern must be a string");
    try {
      std::regex re(it->get_ref<const std::string&>(), std::regex::ECMAScript);
    } catch (const std::regex_error&) {
      return fail("pattern does not compile: " + it->dump());
    }
  }
  return true;
}

}  // namespace ans
