#pragma once

// Independent range-satisfaction oracle for the tests. Works on plain integer
// triples with interval arithmetic derived from the node-semver expansion
// rules, deliberately sharing no code with the library implementation.
// Prerelease handling is out of scope here; the truth-table tests cover it.

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ans::test {

using Triple = std::array<std::int64_t, 3>;

inline std::optional<Triple> oracle_parse_triple(const std::string& text, int* given = nullptr) {
  Triple t{0, 0, 0};
  int part = 0;
  std::string cur;
  auto flush = [&]() -> bool {
    if (cur.empty() || part >= 3) return false;
    for (char c : cur)
      if (c < '0' || c > '9') return false;
    t[part++] = std::stoll(cur);
    cur.clear();
    return true;
  };
  for (char c : text) {
    if (c == '.') {
      if (!flush()) return std::nullopt;
    } else {
      cur.push_back(c);
    }
  }
  if (!flush()) return std::nullopt;
  if (given) *given = part;
  return t;
}

inline int oracle_cmp(const Triple& a, const Triple& b) {
  for (int i = 0; i < 3; ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

// Half-open interval [lo, hi); hi absent means unbounded.
struct Interval {
  Triple lo{0, 0, 0};
  std::optional<Triple> hi;
  bool lo_inclusive = true;
  bool hi_inclusive = false;
};

// node-semver expansions:
//   ^a.b.c -> [a.b.c, next-leftmost-nonzero)
//   ~a.b.c -> [a.b.c, a.(b+1).0); ~a -> [a.0.0, (a+1).0.0)
//   exact  -> degenerate interval
inline std::optional<std::vector<Interval>> oracle_intervals(const std::string& range) {
  std::vector<Interval> out;
  std::string s = range;
  if (s.empty() || s == "*" || s == "x" || s == "X") {
    out.push_back(Interval{});
    return out;
  }
  if (s[0] == '^' || s[0] == '~') {
    int given = 0;
    auto base = oracle_parse_triple(s.substr(1), &given);
    if (!base) return std::nullopt;
    Interval iv;
    iv.lo = *base;
    Triple hi{0, 0, 0};
    if (s[0] == '^') {
      if ((*base)[0] > 0 || given == 1)
        hi = {(*base)[0] + 1, 0, 0};
      else if ((*base)[1] > 0 || given == 2)
        hi = {(*base)[0], (*base)[1] + 1, 0};
      else
        hi = {(*base)[0], (*base)[1], (*base)[2] + 1};
    } else {
      if (given <= 1)
        hi = {(*base)[0] + 1, 0, 0};
      else
        hi = {(*base)[0], (*base)[1] + 1, 0};
    }
    iv.hi = hi;
    out.push_back(iv);
    return out;
  }
  if (s.find_first_of("<>=") != std::string::npos) {
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      Interval iv;
      std::string op;
      size_t i = 0;
      while (i < tok.size() && (tok[i] == '<' || tok[i] == '>' || tok[i] == '=')) op += tok[i++];
      auto v = oracle_parse_triple(tok.substr(i));
      if (!v) return std::nullopt;
      if (op == ">=") {
        iv.lo = *v;
      } else if (op == ">") {
        iv.lo = *v;
        iv.lo_inclusive = false;
      } else if (op == "<") {
        iv.hi = *v;
      } else if (op == "<=") {
        iv.hi = *v;
        iv.hi_inclusive = true;
      } else if (op == "=") {
        iv.lo = *v;
        iv.hi = *v;
        iv.hi_inclusive = true;
      } else {
        return std::nullopt;
      }
      out.push_back(iv);
    }
    if (out.empty()) return std::nullopt;
    return out;
  }
  auto v = oracle_parse_triple(s);
  if (!v) return std::nullopt;
  Interval iv;
  iv.lo = *v;
  iv.hi = *v;
  iv.hi_inclusive = true;
  out.push_back(iv);
  return out;
}

// True iff the (release) triple satisfies the range per the oracle.
inline std::optional<bool> oracle_satisfies(const Triple& v, const std::string& range) {
  auto ivs = oracle_intervals(range);
  if (!ivs) return std::nullopt;
  for (const auto& iv : *ivs) {
    int lo = oracle_cmp(v, iv.lo);
    if (iv.lo_inclusive ? lo < 0 : lo <= 0) return false;
    if (iv.hi) {
      int hi = oracle_cmp(v, *iv.hi);
      if (iv.hi_inclusive ? hi > 0 : hi >= 0) return false;
    }
  }
  return true;
}

}  // namespace ans::test
