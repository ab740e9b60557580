#pragma once

#include <mutex>
#include <string>

#include "ans/clock.hpp"
#include "ans/json_canon.hpp"

namespace ans {

// Append-only NDJSON audit trail. Each line is the canonical JSON of
// {agentUuid, at, op, prevHash, recordHash} plus a "hash" field equal to the
// SHA-256 of that canonical form, chaining on the previous line's hash.
class AuditLog {
 public:
  AuditLog(std::string path, Clock clock);

  void append(const std::string& op, const std::string& agent_uuid,
              const std::string& record_hash);
  std::string last_hash() const;

  // Recomputes the chain; false on any edit, reorder, or truncation-in-middle.
  static bool verify_file(const std::string& path, std::string* why = nullptr);

  static constexpr const char* kGenesis =
      "0000000000000000000000000000000000000000000000000000000000000000";

 private:
  mutable std::mutex mu_;
  std::string path_;
  Clock clock_;
  std::string prev_hash_;
};

}  // namespace ans
