#include "edgartext/rate_limiter.hpp"

#include <stdexcept>
#include <thread>

namespace edgartext {

namespace {
RateLimiter::Duration interval_for(double max_per_second) {
    if (max_per_second <= 0.0) throw std::invalid_argument("rate limit must be positive");
    return std::chrono::duration_cast<RateLimiter::Duration>(
        std::chrono::duration<double>(1.0 / max_per_second));
}
}  // namespace

RateLimiter::RateLimiter(double max_per_second)
    : RateLimiter(max_per_second, [] { return std::chrono::steady_clock::now(); },
                  [](Duration d) { std::this_thread::sleep_for(d); }) {}

RateLimiter::RateLimiter(double max_per_second, ClockFn clock, SleepFn sleep)
    : interval_(interval_for(max_per_second)),
      clock_(std::move(clock)),
      sleep_(std::move(sleep)) {}

void RateLimiter::acquire() {
    Duration wait{};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        TimePoint now = clock_();
        if (!started_ || now >= next_allowed_) {
            started_ = true;
            next_allowed_ = now + interval_;
            return;
        }
        wait = next_allowed_ - now;
        next_allowed_ += interval_;
    }
    sleep_(wait);
}

}  // namespace edgartext
