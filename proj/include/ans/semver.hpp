#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ans {

// Semantic version per SemVer 2.0.0. Build metadata is carried but ignored
// for precedence.
struct SemVer {
  std::int64_t major = 0;
  std::int64_t minor = 0;
  std::int64_t patch = 0;
  std::vector<std::string> prerelease;  // dot-separated identifiers
  std::string build;                    // text after '+', may be empty

  bool is_prerelease() const { return !prerelease.empty(); }
  std::string to_string() const;

  // Core tuple equality, prerelease included, build ignored.
  friend bool operator==(const SemVer& a, const SemVer& b);
};

// SemVer 2.0.0 precedence: major/minor/patch numerically, then prerelease
// (absent > present; identifiers compared numerically when both numeric,
// numeric < alphanumeric, else ASCII). Build metadata never participates.
std::strong_ordering compare_versions(const SemVer& a, const SemVer& b);

// Strict parse of MAJOR.MINOR.PATCH[-pre][+build]. Returns nullopt on
// malformed input.
std::optional<SemVer> parse_version(const std::string& s);

// Lenient parse used for ANSNames and range operands: minor/patch may be
// omitted and normalize to 0. components_given reports how many numeric
// fields were present (1..3).
std::optional<SemVer> parse_partial_version(const std::string& s, int* components_given = nullptr);

enum class RangeKind { Wildcard, Exact, Caret, Tilde, ComparatorSet };

struct Comparator {
  enum class Op { Lt, Le, Gt, Ge, Eq };
  Op op = Op::Eq;
  SemVer operand;
};

// A parsed version range. Caret/tilde/exact desugar into comparators; the
// original operands are kept so the prerelease gate can be applied
// (a prerelease version only matches when some comparator explicitly names
// a prerelease on the same major.minor.patch tuple).
struct VersionRange {
  std::string raw;
  RangeKind kind = RangeKind::Wildcard;
  std::vector<Comparator> comparators;

  static VersionRange parse(const std::string& raw);  // throws MalformedRange
  bool satisfied_by(const SemVer& v) const;
};

// Convenience wrapper matching the resolution algorithm's range check:
// true iff v satisfies r, with pre-release versions admitted only when the
// range itself names a prerelease on the same core tuple.
bool is_version_compatible(const SemVer& v, const VersionRange& r);

}  // namespace ans
