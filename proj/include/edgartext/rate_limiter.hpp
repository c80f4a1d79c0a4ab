#pragma once

#include <chrono>
#include <functional>
#include <mutex>

namespace edgartext {

/// Paces request starts so that no more than `max_per_second` begin per
/// second, by enforcing a minimum spacing of 1/max_per_second between grants.
/// Thread-safe.  The clock and sleep hooks exist so tests can drive virtual
/// time instead of waiting on the wall clock.
class RateLimiter {
public:
    using TimePoint = std::chrono::steady_clock::time_point;
    using Duration = std::chrono::steady_clock::duration;
    using ClockFn = std::function<TimePoint()>;
    using SleepFn = std::function<void(Duration)>;

    explicit RateLimiter(double max_per_second);
    RateLimiter(double max_per_second, ClockFn clock, SleepFn sleep);

    /// Block until the next request may start.
    void acquire();

    Duration interval() const { return interval_; }

private:
    Duration interval_;
    ClockFn clock_;
    SleepFn sleep_;
    std::mutex mutex_;
    TimePoint next_allowed_{};
    bool started_ = false;
};

}  // namespace edgartext
