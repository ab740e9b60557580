#include "ans/rate_limit.hpp"

namespace ans {

TokenBucket::TokenBucket(double capacity, double refill_per_second, Clock clock)
    : capacity_(capacity), rate_(refill_per_second), level_(capacity), clock_(std::move(clock)) {
  last_ = clock_();
}

void TokenBucket::refill_locked() {
  auto now = clock_();
  if (now <= last_) {
    last_ = now;  // clock moved backwards: never mint tokens for it
    return;
  }
  double elapsed = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  level_ = std::min(capacity_, level_ + elapsed * rate_);
}

bool TokenBucket::try_consume(double tokens) {
  std::lock_guard<std::mutex> lock(mu_);
  refill_locked();
  if (level_ < tokens) return false;
  level_ -= tokens;
  return true;
}

double TokenBucket::level() {
  std::lock_guard<std::mutex> lock(mu_);
  refill_locked();
  return level_;
}

RateLimiter::RateLimiter(RateLimitConfig config, Clock clock)
    : config_(config), clock_(std::move(clock)) {}

TokenBucket& RateLimiter::bucket_for(const std::string& client, const std::string& capability) {
  std::string key = config_.per_capability ? client + "\x1f" + capability : client;
  std::lock_guard<std::mutex> lock(mu_);
  auto it = buckets_.find(key);
  if (it == buckets_.end())
    it = buckets_
             .emplace(key, std::make_unique<TokenBucket>(config_.capacity,
                                                         config_.refill_per_second, clock_))
             .first;
  return *it->second;
}

bool RateLimiter::allow(const std::string& client, const std::string& capability) {
  return bucket_for(client, capability).try_consume(1.0);
}

double RateLimiter::level(const std::string& client, const std::string& capability) {
  return bucket_for(client, capability).level();
}

}  // namespace ans
