#include "ans/semver.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

#include "ans/errors.hpp"

namespace ans {

namespace {

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

bool valid_identifier(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-';
  });
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<std::int64_t> parse_numeric(const std::string& s) {
  if (!all_digits(s)) return std::nullopt;
  if (s.size() > 1 && s[0] == '0') return std::nullopt;  // no leading zeros
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// identifier precedence per SemVer 2.0.0 item 11
std::strong_ordering compare_identifier(const std::string& a, const std::string& b) {
  bool na = all_digits(a), nb = all_digits(b);
  if (na && nb) {
    auto va = parse_numeric(a).value_or(0);
    auto vb = parse_numeric(b).value_or(0);
    return va <=> vb;
  }
  if (na != nb) return na ? std::strong_ordering::less : std::strong_ordering::greater;
  int c = a.compare(b);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

std::optional<SemVer> parse_core(const std::string& s, int* components_given, bool allow_partial) {
  SemVer v;
  std::string core = s;
  // split off build then prerelease
  if (auto plus = core.find('+'); plus != std::string::npos) {
    v.build = core.substr(plus + 1);
    core = core.substr(0, plus);
    if (v.build.empty()) return std::nullopt;
    for (const auto& id : split(v.build, '.'))
      if (!valid_identifier(id)) return std::nullopt;
  }
  if (auto dash = core.find('-'); dash != std::string::npos) {
    std::string pre = core.substr(dash + 1);
    core = core.substr(0, dash);
    if (pre.empty()) return std::nullopt;
    for (const auto& id : split(pre, '.')) {
      if (!valid_identifier(id)) return std::nullopt;
      if (all_digits(id) && id.size() > 1 && id[0] == '0') return std::nullopt;
      v.prerelease.push_back(id);
    }
  }

  auto fields = split(core, '.');
  if (fields.empty() || fields.size() > 3) return std::nullopt;
  if (!allow_partial && fields.size() != 3) return std::nullopt;
  std::int64_t* slots[3] = {&v.major, &v.minor, &v.patch};
  for (size_t i = 0; i < fields.size(); ++i) {
    auto n = parse_numeric(fields[i]);
    if (!n) return std::nullopt;
    *slots[i] = *n;
  }
  if (components_given) *components_given = static_cast<int>(fields.size());
  return v;
}

}  // namespace

bool operator==(const SemVer& a, const SemVer& b) {
  return a.major == b.major && a.minor == b.minor && a.patch == b.patch &&
         a.prerelease == b.prerelease;
}

std::string SemVer::to_string() const {
  std::ostringstream os;
  os << major << '.' << minor << '.' << patch;
  for (size_t i = 0; i < prerelease.size(); ++i) os << (i == 0 ? '-' : '.') << prerelease[i];
  if (!build.empty()) os << '+' << build;
  return os.str();
}

std::strong_ordering compare_versions(const SemVer& a, const SemVer& b) {
  if (auto c = a.major <=> b.major; c != 0) return c;
  if (auto c = a.minor <=> b.minor; c != 0) return c;
  if (auto c = a.patch <=> b.patch; c != 0) return c;
  // release outranks any prerelease of the same core tuple
  if (a.prerelease.empty() != b.prerelease.empty())
    return a.prerelease.empty() ? std::strong_ordering::greater : std::strong_ordering::less;
  for (size_t i = 0; i < std::min(a.prerelease.size(), b.prerelease.size()); ++i) {
    if (auto c = compare_identifier(a.prerelease[i], b.prerelease[i]); c != 0) return c;
  }
  return a.prerelease.size() <=> b.prerelease.size();
}

std::optional<SemVer> parse_version(const std::string& s) {
  return parse_core(s, nullptr, /*allow_partial=*/false);
}

std::optional<SemVer> parse_partial_version(const std::string& s, int* components_given) {
  return parse_core(s, components_given, /*allow_partial=*/true);
}

namespace {

void desugar_caret(const SemVer& base, int given, std::vector<Comparator>& out) {
  out.push_back({Comparator::Op::Ge, base});
  SemVer upper;
  if (base.major > 0 || given == 1) {
    upper.major = base.major + 1;
  } else if (base.minor > 0 || given == 2) {
    upper.major = base.major;
    upper.minor = base.minor + 1;
  } else {
    upper.major = base.major;
    upper.minor = base.minor;
    upper.patch = base.patch + 1;
  }
  out.push_back({Comparator::Op::Lt, upper});
}

void desugar_tilde(const SemVer& base, int given, std::vector<Comparator>& out) {
  out.push_back({Comparator::Op::Ge, base});
  SemVer upper;
  if (given <= 1) {
    upper.major = base.major + 1;
  } else {
    upper.major = base.major;
    upper.minor = base.minor + 1;
  }
  out.push_back({Comparator::Op::Lt, upper});
}

std::optional<Comparator> parse_comparator(const std::string& tok) {
  Comparator c;
  size_t off = 0;
  if (tok.rfind(">=", 0) == 0) { c.op = Comparator::Op::Ge; off = 2; }
  else if (tok.rfind("<=", 0) == 0) { c.op = Comparator::Op::Le; off = 2; }
  else if (tok.rfind(">", 0) == 0) { c.op = Comparator::Op::Gt; off = 1; }
  else if (tok.rfind("<", 0) == 0) { c.op = Comparator::Op::Lt; off = 1; }
  else if (tok.rfind("=", 0) == 0) { c.op = Comparator::Op::Eq; off = 1; }
  else return std::nullopt;
  auto v = parse_partial_version(tok.substr(off));
  if (!v) return std::nullopt;
  c.operand = *v;
  return c;
}

bool evaluate(const Comparator& c, const SemVer& v) {
  auto ord = compare_versions(v, c.operand);
  switch (c.op) {
    case Comparator::Op::Lt: return ord < 0;
    case Comparator::Op::Le: return ord <= 0;
    case Comparator::Op::Gt: return ord > 0;
    case Comparator::Op::Ge: return ord >= 0;
    case Comparator::Op::Eq: return ord == 0;
  }
  return false;
}

}  // namespace

VersionRange VersionRange::parse(const std::string& raw) {
  VersionRange r;
  r.raw = raw;

  // trim
  std::string s = raw;
  auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());

  if (s.empty() || s == "*" || s == "x" || s == "X") {
    r.kind = RangeKind::Wildcard;
    return r;
  }
  if (s[0] == '^' || s[0] == '~') {
    int given = 0;
    auto base = parse_partial_version(s.substr(1), &given);
    if (!base)
      throw AnsError(ErrorCode::MalformedRange, "malformed version range: " + raw);
    r.kind = s[0] == '^' ? RangeKind::Caret : RangeKind::Tilde;
    if (s[0] == '^')
      desugar_caret(*base, given, r.comparators);
    else
      desugar_tilde(*base, given, r.comparators);
    return r;
  }
  if (s.find_first_of("<>=") != std::string::npos) {
    r.kind = RangeKind::ComparatorSet;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      auto c = parse_comparator(tok);
      if (!c)
        throw AnsError(ErrorCode::MalformedRange, "malformed comparator in range: " + raw);
      r.comparators.push_back(*c);
    }
    if (r.comparators.empty())
      throw AnsError(ErrorCode::MalformedRange, "empty comparator set: " + raw);
    return r;
  }
  // fall back to a specific version, per the resolution algorithm's comment
  if (auto v = parse_partial_version(s)) {
    r.kind = RangeKind::Exact;
    r.comparators.push_back({Comparator::Op::Eq, *v});
    return r;
  }
  throw AnsError(ErrorCode::MalformedRange, "neither a range nor a version: " + raw);
}

bool VersionRange::satisfied_by(const SemVer& v) const {
  if (kind == RangeKind::Wildcard) return v.prerelease.empty();
  if (v.is_prerelease()) {
    // prerelease versions only match when some comparator names a prerelease
    // on the exact same core tuple
    bool admitted = false;
    for (const auto& c : comparators) {
      if (!c.operand.prerelease.empty() && c.operand.major == v.major &&
          c.operand.minor == v.minor && c.operand.patch == v.patch) {
        admitted = true;
        break;
      }
    }
    if (!admitted) return false;
  }
  for (const auto& c : comparators)
    if (!evaluate(c, v)) return false;
  return true;
}

bool is_version_compatible(const SemVer& v, const VersionRange& r) {
  return r.satisfied_by(v);
}

}  // namespace ans
