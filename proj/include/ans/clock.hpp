#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>

namespace ans {

// Injectable time source. Everything that reads the wall clock (certificate
// expiry, TTL caches, token buckets, audit timestamps) goes through one of
// these so tests can run on a simulated clock.
using Clock = std::function<std::chrono::system_clock::time_point()>;

inline Clock system_clock() {
  return [] { return std::chrono::system_clock::now(); };
}

inline std::int64_t to_unix_seconds(std::chrono::system_clock::time_point tp) {
  return std::chrono::duration_cast<std::chrono::seconds>(tp.time_since_epoch()).count();
}

inline std::chrono::system_clock::time_point from_unix_seconds(std::int64_t s) {
  return std::chrono::system_clock::time_point(std::chrono::seconds(s));
}

// Manually advanced clock for tests.
class ManualClock {
 public:
  explicit ManualClock(std::int64_t start_unix_seconds = 1'700'000'000)
      : now_(std::make_shared<std::chrono::system_clock::time_point>(
            from_unix_seconds(start_unix_seconds))) {}

  Clock clock() const {
    auto now = now_;
    return [now] { return *now; };
  }

  void advance(std::chrono::system_clock::duration d) { *now_ += d; }
  void advance_seconds(double s) {
    *now_ += std::chrono::duration_cast<std::chrono::system_clock::duration>(
        std::chrono::duration<double>(s));
  }
  std::chrono::system_clock::time_point now() const { return *now_; }

 private:
  std::shared_ptr<std::chrono::system_clock::time_point> now_;
};

}  // namespace ans
