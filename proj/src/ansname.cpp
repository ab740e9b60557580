#include "ans/ansname.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

#include "ans/errors.hpp"

namespace ans {

namespace {

bool valid_label(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

bool valid_scheme(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '+' || c == '-' || c == '.';
  });
}

bool pure_numeric(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// A label opens the version segment when it is exactly v<digits> with an
// optional single -prerelease/+build suffix (no dots inside a label by
// construction). "v2engine" is an ordinary label; "v2", "v2-rc1" are not.
bool version_label(const std::string& s) {
  if (s.size() < 2 || s[0] != 'v' || !std::isdigit(static_cast<unsigned char>(s[1]))) return false;
  size_t i = 1;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == s.size()) return true;
  return s[i] == '-' || s[i] == '+';
}

// digits immediately followed by a -/+ suffix, e.g. "3-rc1" or "1+build5"
bool numeric_with_suffix(const std::string& s) {
  size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  return i > 0 && i < s.size() && (s[i] == '-' || s[i] == '+');
}

[[noreturn]] void malformed(const std::string& name, const std::string& why) {
  throw AnsError(ErrorCode::MalformedName, "malformed ANSName \"" + name + "\": " + why);
}

}  // namespace

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::A2a: return "a2a";
    case Protocol::Mcp: return "mcp";
    case Protocol::Acp: return "acp";
    case Protocol::Extensible: return "extensible";
  }
  return "extensible";
}

std::optional<Protocol> protocol_from_string(const std::string& s) {
  if (s == "a2a") return Protocol::A2a;
  if (s == "mcp") return Protocol::Mcp;
  if (s == "acp") return Protocol::Acp;
  return std::nullopt;
}

std::string ANSName::scheme_string() const {
  return protocol == Protocol::Extensible ? scheme : protocol_name(protocol);
}

ANSName ANSName::parse(const std::string& s) {
  ANSName n;
  auto sep = s.find("://");
  if (sep == std::string::npos) malformed(s, "missing \"://\"");

  std::string scheme = s.substr(0, sep);
  if (!valid_scheme(scheme)) malformed(s, "invalid protocol scheme");
  if (auto p = protocol_from_string(scheme)) {
    n.protocol = *p;
  } else {
    n.protocol = Protocol::Extensible;
    n.scheme = scheme;
  }

  std::string rest = s.substr(sep + 3);
  std::vector<std::string> labels;
  {
    std::string cur;
    for (char c : rest) {
      if (c == '.') {
        labels.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    labels.push_back(cur);
  }
  if (labels.size() < 4) malformed(s, "fewer than 4 labels");
  for (const auto& l : labels)
    if (l.empty()) malformed(s, "empty label");

  // locate the version label; it must sit right after agentID.capability.provider
  size_t vidx = labels.size();
  for (size_t i = 0; i < labels.size(); ++i) {
    if (version_label(labels[i])) {
      vidx = i;
      break;
    }
  }
  if (vidx == labels.size()) malformed(s, "no version label");
  if (vidx != 3) malformed(s, "expected agentID.capability.provider before the version");

  n.agent_id = labels[0];
  n.capability = labels[1];
  n.provider = labels[2];
  for (const auto& l : {n.agent_id, n.capability, n.provider})
    if (!valid_label(l)) malformed(s, "label contains characters outside [A-Za-z0-9_-]");

  // fold the version: v-label, then purely numeric labels (max three core
  // components), with at most one numeric-with-suffix label closing it
  std::string version_text = labels[vidx].substr(1);
  int cores = 1;
  bool suffixed = version_text.find_first_of("-+") != std::string::npos;
  size_t next = vidx + 1;
  while (next < labels.size() && !suffixed && cores < 3) {
    if (pure_numeric(labels[next])) {
      version_text += "." + labels[next];
      ++cores;
      ++next;
    } else if (numeric_with_suffix(labels[next])) {
      version_text += "." + labels[next];
      suffixed = true;
      ++next;
    } else {
      break;
    }
  }

  auto v = parse_partial_version(version_text);
  if (!v) malformed(s, "unparseable version \"" + version_text + "\"");
  n.version = *v;

  if (next < labels.size()) {
    std::string ext;
    for (size_t i = next; i < labels.size(); ++i) {
      if (!valid_label(labels[i])) malformed(s, "extension label contains invalid characters");
      if (i > next) ext += ".";
      ext += labels[i];
    }
    n.extension = ext;
  }
  return n;
}

std::string ANSName::to_string() const {
  std::ostringstream os;
  os << scheme_string() << "://" << agent_id << '.' << capability << '.' << provider
     << ".v" << version.to_string();
  if (extension) os << '.' << *extension;
  return os.str();
}

bool ANSName::same_tuple(const ANSName& o) const {
  return scheme_string() == o.scheme_string() && agent_id == o.agent_id &&
         capability == o.capability && provider == o.provider;
}

bool operator==(const ANSName& a, const ANSName& b) {
  return a.same_tuple(b) && a.version == b.version && a.extension == b.extension;
}

}  // namespace ans
