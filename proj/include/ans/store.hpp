#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ans {

struct StoredAgent {
  std::string agent_uuid;
  std::string protocol;
  std::string agent_id;
  std::string capability;
  std::string provider;
  std::string version;
  std::string ans_name;     // canonical name string
  std::string record_json;  // full AgentRecord document
};

// Persistence boundary for the registry. Implementations must enforce
// uniqueness of the (protocol, agentID, capability, provider, version)
// 5-tuple across distinct agent UUIDs (DuplicateName) and keep challenge
// history append-only.
class Store {
 public:
  virtual ~Store() = default;

  virtual void put_agent(const StoredAgent& agent) = 0;  // upsert by agent_uuid
  virtual std::optional<StoredAgent> get_agent(const std::string& agent_uuid) = 0;
  virtual std::optional<StoredAgent> find_exact(const std::string& protocol,
                                                const std::string& agent_id,
                                                const std::string& capability,
                                                const std::string& provider,
                                                const std::string& version) = 0;
  virtual std::vector<StoredAgent> find_matching(const std::string& protocol,
                                                 const std::string& agent_id,
                                                 const std::string& capability,
                                                 const std::string& provider) = 0;
  virtual std::vector<StoredAgent> all_agents() = 0;

  virtual void append_challenge(const std::string& agent_uuid, const std::string& outcome_json) = 0;
  virtual std::vector<std::string> challenge_history(const std::string& agent_uuid) = 0;

  virtual void put_meta(const std::string& key, const std::string& value) = 0;
  virtual std::optional<std::string> get_meta(const std::string& key) = 0;
};

// SQLite-backed store; path ":memory:" gives an ephemeral instance.
std::unique_ptr<Store> open_sqlite_store(const std::string& path);

}  // namespace ans
