#include "ans/store.hpp"

#include <sqlite3.h>

#include <filesystem>
#include <mutex>

#include "ans/errors.hpp"

namespace ans {
namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK)
      throw AnsError(ErrorCode::StoreError,
                     std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int idx, const std::string& value) {
    if (sqlite3_bind_text(stmt_, idx, value.data(), static_cast<int>(value.size()),
                          SQLITE_TRANSIENT) != SQLITE_OK)
      throw AnsError(ErrorCode::StoreError, std::string("sqlite bind: ") + sqlite3_errmsg(db_));
    return *this;
  }

  // true while a row is available
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) {
      std::string msg = sqlite3_errmsg(db_);
      throw AnsError(ErrorCode::DuplicateName, "uniqueness violation: " + msg);
    }
    throw AnsError(ErrorCode::StoreError, std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }

  std::string column_text(int idx) {
    const unsigned char* p = sqlite3_column_text(stmt_, idx);
    int n = sqlite3_column_bytes(stmt_, idx);
    return p ? std::string(reinterpret_cast<const char*>(p), static_cast<size_t>(n)) : "";
  }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

StoredAgent agent_from_row(Statement& stmt) {
  StoredAgent a;
  a.agent_uuid = stmt.column_text(0);
  a.protocol = stmt.column_text(1);
  a.agent_id = stmt.column_text(2);
  a.capability = stmt.column_text(3);
  a.provider = stmt.column_text(4);
  a.version = stmt.column_text(5);
  a.ans_name = stmt.column_text(6);
  a.record_json = stmt.column_text(7);
  return a;
}

class SqliteStore final : public Store {
 public:
  explicit SqliteStore(const std::string& path) {
    if (path != ":memory:") {
      std::filesystem::path p(path);
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    }
    if (sqlite3_open_v2(path.c_str(), &db_,
                        SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                        nullptr) != SQLITE_OK)
      throw AnsError(ErrorCode::StoreError,
                     "cannot open store at " + path + ": " + (db_ ? sqlite3_errmsg(db_) : ""));
    exec("PRAGMA journal_mode=WAL");
    exec("PRAGMA foreign_keys=ON");
    exec(
        "CREATE TABLE IF NOT EXISTS agents ("
        "  agent_uuid TEXT PRIMARY KEY,"
        "  protocol TEXT NOT NULL,"
        "  agent_id TEXT NOT NULL,"
        "  capability TEXT NOT NULL,"
        "  provider TEXT NOT NULL,"
        "  version TEXT NOT NULL,"
        "  ans_name TEXT NOT NULL,"
        "  record_json TEXT NOT NULL)");
    exec(
        "CREATE UNIQUE INDEX IF NOT EXISTS agents_tuple5 "
        "ON agents(protocol, agent_id, capability, provider, version)");
    exec(
        "CREATE INDEX IF NOT EXISTS agents_tuple4 "
        "ON agents(protocol, agent_id, capability, provider)");
    exec(
        "CREATE TABLE IF NOT EXISTS challenges ("
        "  seq INTEGER PRIMARY KEY AUTOINCREMENT,"
        "  agent_uuid TEXT NOT NULL,"
        "  outcome_json TEXT NOT NULL)");
    exec("CREATE INDEX IF NOT EXISTS challenges_uuid ON challenges(agent_uuid)");
    exec("CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL)");
  }

  ~SqliteStore() override { sqlite3_close(db_); }

  void put_agent(const StoredAgent& a) override {
    std::lock_guard<std::mutex> lock(write_mu_);
    Statement stmt(db_,
                   "INSERT INTO agents (agent_uuid, protocol, agent_id, capability, provider, "
                   "version, ans_name, record_json) VALUES (?1,?2,?3,?4,?5,?6,?7,?8) "
                   "ON CONFLICT(agent_uuid) DO UPDATE SET protocol=?2, agent_id=?3, "
                   "capability=?4, provider=?5, version=?6, ans_name=?7, record_json=?8");
    stmt.bind(1, a.agent_uuid)
        .bind(2, a.protocol)
        .bind(3, a.agent_id)
        .bind(4, a.capability)
        .bind(5, a.provider)
        .bind(6, a.version)
        .bind(7, a.ans_name)
        .bind(8, a.record_json);
    stmt.step();
  }

  std::optional<StoredAgent> get_agent(const std::string& uuid) override {
    Statement stmt(db_, "SELECT agent_uuid, protocol, agent_id, capability, provider, version, "
                        "ans_name, record_json FROM agents WHERE agent_uuid = ?1");
    stmt.bind(1, uuid);
    if (!stmt.step()) return std::nullopt;
    return agent_from_row(stmt);
  }

  std::optional<StoredAgent> find_exact(const std::string& protocol, const std::string& agent_id,
                                        const std::string& capability, const std::string& provider,
                                        const std::string& version) override {
    Statement stmt(db_, "SELECT agent_uuid, protocol, agent_id, capability, provider, version, "
                        "ans_name, record_json FROM agents WHERE protocol=?1 AND agent_id=?2 AND "
                        "capability=?3 AND provider=?4 AND version=?5");
    stmt.bind(1, protocol).bind(2, agent_id).bind(3, capability).bind(4, provider).bind(5, version);
    if (!stmt.step()) return std::nullopt;
    return agent_from_row(stmt);
  }

  std::vector<StoredAgent> find_matching(const std::string& protocol, const std::string& agent_id,
                                         const std::string& capability,
                                         const std::string& provider) override {
    Statement stmt(db_, "SELECT agent_uuid, protocol, agent_id, capability, provider, version, "
                        "ans_name, record_json FROM agents WHERE protocol=?1 AND agent_id=?2 AND "
                        "capability=?3 AND provider=?4 ORDER BY version");
    stmt.bind(1, protocol).bind(2, agent_id).bind(3, capability).bind(4, provider);
    std::vector<StoredAgent> out;
    while (stmt.step()) out.push_back(agent_from_row(stmt));
    return out;
  }

  std::vector<StoredAgent> all_agents() override {
    Statement stmt(db_, "SELECT agent_uuid, protocol, agent_id, capability, provider, version, "
                        "ans_name, record_json FROM agents ORDER BY ans_name");
    std::vector<StoredAgent> out;
    while (stmt.step()) out.push_back(agent_from_row(stmt));
    return out;
  }

  void append_challenge(const std::string& uuid, const std::string& outcome_json) override {
    std::lock_guard<std::mutex> lock(write_mu_);
    Statement stmt(db_, "INSERT INTO challenges (agent_uuid, outcome_json) VALUES (?1, ?2)");
    stmt.bind(1, uuid).bind(2, outcome_json);
    stmt.step();
  }

  std::vector<std::string> challenge_history(const std::string& uuid) override {
    Statement stmt(db_,
                   "SELECT outcome_json FROM challenges WHERE agent_uuid = ?1 ORDER BY seq");
    stmt.bind(1, uuid);
    std::vector<std::string> out;
    while (stmt.step()) out.push_back(stmt.column_text(0));
    return out;
  }

  void put_meta(const std::string& key, const std::string& value) override {
    std::lock_guard<std::mutex> lock(write_mu_);
    Statement stmt(db_, "INSERT INTO meta (key, value) VALUES (?1, ?2) "
                        "ON CONFLICT(key) DO UPDATE SET value=?2");
    stmt.bind(1, key).bind(2, value);
    stmt.step();
  }

  std::optional<std::string> get_meta(const std::string& key) override {
    Statement stmt(db_, "SELECT value FROM meta WHERE key = ?1");
    stmt.bind(1, key);
    if (!stmt.step()) return std::nullopt;
    return stmt.column_text(0);
  }

 private:
  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown sqlite error";
      sqlite3_free(err);
      throw AnsError(ErrorCode::StoreError, "sqlite exec failed: " + msg);
    }
  }

  sqlite3* db_ = nullptr;
  std::mutex write_mu_;
};

}  // namespace

std::unique_ptr<Store> open_sqlite_store(const std::string& path) {
  return std::make_unique<SqliteStore>(path);
}

}  // namespace ans
