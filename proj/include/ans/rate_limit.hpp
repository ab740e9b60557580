#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "ans/clock.hpp"

namespace ans {

// Continuous-refill token bucket. Arithmetic is plain double so that whole-
// second refills at integral rates are exact (1.0 s at 100/s adds exactly
// 100.0 tokens).
class TokenBucket {
 public:
  TokenBucket(double capacity, double refill_per_second, Clock clock);

  bool try_consume(double tokens = 1.0);
  double level();  // refreshed against the injected clock

 private:
  void refill_locked();

  double capacity_;
  double rate_;
  double level_;
  std::chrono::system_clock::time_point last_;
  Clock clock_;
  std::mutex mu_;
};

struct RateLimitConfig {
  double capacity = 500.0;
  double refill_per_second = 100.0;
  bool per_capability = true;
};

// One bucket per scope; scope = (client identity, capability) when
// per-capability mode is on, otherwise client identity alone. Buckets start
// full.
class RateLimiter {
 public:
  RateLimiter(RateLimitConfig config, Clock clock);

  bool allow(const std::string& client, const std::string& capability);
  double level(const std::string& client, const std::string& capability);
  const RateLimitConfig& config() const { return config_; }

 private:
  TokenBucket& bucket_for(const std::string& client, const std::string& capability);

  RateLimitConfig config_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::string, std::unique_ptr<TokenBucket>> buckets_;
};

}  // namespace ans
