#include "ans/audit_log.hpp"

#include <filesystem>
#include <fstream>

#include "ans/errors.hpp"

namespace ans {

AuditLog::AuditLog(std::string path, Clock clock)
    : path_(std::move(path)), clock_(std::move(clock)), prev_hash_(kGenesis) {
  std::filesystem::path p(path_);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ifstream in(path_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      Json entry = Json::parse(line);
      prev_hash_ = entry.at("hash").get<std::string>();
    } catch (const Json::exception&) {
      throw AnsError(ErrorCode::StoreError, "corrupt audit log line in " + path_);
    }
  }
}

void AuditLog::append(const std::string& op, const std::string& agent_uuid,
                      const std::string& record_hash) {
  std::lock_guard<std::mutex> lock(mu_);
  Json entry;
  entry["op"] = op;
  entry["agentUuid"] = agent_uuid;
  entry["recordHash"] = record_hash;
  entry["prevHash"] = prev_hash_;
  entry["at"] = to_unix_seconds(clock_());
  std::string hash = sha256_hex(canonicalize(entry));
  entry["hash"] = hash;
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw AnsError(ErrorCode::StoreError, "cannot append to audit log " + path_);
  out << canonicalize(entry) << "\n";
  prev_hash_ = hash;
}

std::string AuditLog::last_hash() const {
  std::lock_guard<std::mutex> lock(mu_);
  return prev_hash_;
}

bool AuditLog::verify_file(const std::string& path, std::string* why) {
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  std::ifstream in(path);
  if (!in) return fail("cannot open " + path);
  std::string line;
  std::string prev = kGenesis;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json entry;
    try {
      entry = Json::parse(line);
    } catch (const Json::exception& e) {
      return fail("line " + std::to_string(line_no) + ": unparseable: " + e.what());
    }
    if (!entry.contains("hash") || !entry.contains("prevHash"))
      return fail("line " + std::to_string(line_no) + ": missing hash fields");
    if (entry["prevHash"].get<std::string>() != prev)
      return fail("line " + std::to_string(line_no) + ": chain break");
    std::string claimed = entry["hash"].get<std::string>();
    entry.erase("hash");
    if (sha256_hex(canonicalize(entry)) != claimed)
      return fail("line " + std::to_string(line_no) + ": hash mismatch");
    prev = claimed;
  }
  return true;
}

}  // namespace ans
