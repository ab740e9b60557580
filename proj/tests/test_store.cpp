#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "ans/errors.hpp"
#include "ans/store.hpp"

using namespace ans;
namespace fs = std::filesystem;

namespace {

StoredAgent agent(const std::string& uuid, const std::string& version,
                  const std::string& agent_id = "translator") {
  StoredAgent a;
  a.agent_uuid = uuid;
  a.protocol = "mcp";
  a.agent_id = agent_id;
  a.capability = "translate";
  a.provider = "acme";
  a.version = version;
  a.ans_name = "mcp://" + agent_id + ".translate.acme.v" + version;
  a.record_json = R"({"status":"active"})";
  return a;
}

}  // namespace

TEST_CASE("put, get, upsert") {
  auto store = open_sqlite_store(":memory:");
  CHECK_FALSE(store->get_agent("u-1").has_value());

  store->put_agent(agent("u-1", "1.0.0"));
  auto got = store->get_agent("u-1");
  REQUIRE(got.has_value());
  CHECK(got->version == "1.0.0");
  CHECK(got->ans_name == "mcp://translator.translate.acme.v1.0.0");

  // upsert by uuid replaces the row
  auto updated = agent("u-1", "1.0.0");
  updated.record_json = R"({"status":"revoked"})";
  store->put_agent(updated);
  CHECK(store->all_agents().size() == 1);
  CHECK(store->get_agent("u-1")->record_json == R"({"status":"revoked"})");

  // same uuid may move to a new version
  store->put_agent(agent("u-1", "1.1.0"));
  CHECK(store->all_agents().size() == 1);
  CHECK(store->get_agent("u-1")->version == "1.1.0");
}

TEST_CASE("five tuple uniqueness across distinct uuids") {
  auto store = open_sqlite_store(":memory:");
  store->put_agent(agent("u-1", "1.0.0"));

  CHECK_THROWS_AS(store->put_agent(agent("u-2", "1.0.0")), AnsError);
  try {
    store->put_agent(agent("u-2", "1.0.0"));
    FAIL("expected DuplicateName");
  } catch (const AnsError& e) {
    CHECK(e.code() == ErrorCode::DuplicateName);
  }

  // a different version of the same tuple is a separate registration
  store->put_agent(agent("u-2", "2.0.0"));
  CHECK(store->all_agents().size() == 2);
}

TEST_CASE("exact and tuple lookups") {
  auto store = open_sqlite_store(":memory:");
  store->put_agent(agent("u-1", "1.0.0"));
  store->put_agent(agent("u-2", "1.2.3"));
  store->put_agent(agent("u-3", "1.0.0", "summarizer"));

  auto hit = store->find_exact("mcp", "translator", "translate", "acme", "1.2.3");
  REQUIRE(hit.has_value());
  CHECK(hit->agent_uuid == "u-2");
  CHECK_FALSE(store->find_exact("mcp", "translator", "translate", "acme", "9.9.9").has_value());
  CHECK_FALSE(store->find_exact("a2a", "translator", "translate", "acme", "1.0.0").has_value());

  auto versions = store->find_matching("mcp", "translator", "translate", "acme");
  REQUIRE(versions.size() == 2);
  CHECK(versions[0].agent_uuid != versions[1].agent_uuid);
  CHECK(store->find_matching("mcp", "nobody", "translate", "acme").empty());
}

TEST_CASE("challenge history is append only and ordered") {
  auto store = open_sqlite_store(":memory:");
  CHECK(store->challenge_history("u-1").empty());
  store->append_challenge("u-1", R"({"passed":true,"seq":1})");
  store->append_challenge("u-1", R"({"passed":false,"seq":2})");
  store->append_challenge("u-2", R"({"passed":true,"seq":1})");

  auto h = store->challenge_history("u-1");
  REQUIRE(h.size() == 2);
  CHECK(h[0] == R"({"passed":true,"seq":1})");
  CHECK(h[1] == R"({"passed":false,"seq":2})");
  CHECK(store->challenge_history("u-2").size() == 1);
}

TEST_CASE("meta key value") {
  auto store = open_sqlite_store(":memory:");
  CHECK_FALSE(store->get_meta("k").has_value());
  store->put_meta("k", "v1");
  CHECK(store->get_meta("k") == "v1");
  store->put_meta("k", "v2");
  CHECK(store->get_meta("k") == "v2");
}

TEST_CASE("data survives reopen") {
  fs::path db = fs::temp_directory_path() / "ans_store_test.db";
  fs::remove(db);
  {
    auto store = open_sqlite_store(db.string());
    store->put_agent(agent("u-1", "1.0.0"));
    store->append_challenge("u-1", R"({"passed":true})");
    store->put_meta("schema", "1");
  }
  {
    auto store = open_sqlite_store(db.string());
    REQUIRE(store->get_agent("u-1").has_value());
    CHECK(store->challenge_history("u-1").size() == 1);
    CHECK(store->get_meta("schema") == "1");
    // uniqueness still enforced after reopen
    CHECK_THROWS_AS(store->put_agent(agent("u-9", "1.0.0")), AnsError);
  }
  fs::remove(db);
}
