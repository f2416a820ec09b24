#pragma once
// Shared vocabulary: metalevel actions, seeded random streams and a
// deterministic parallel loop.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace selcomp {

// Absolute tolerance used by every argmax before the stop-biased tie-break.
inline constexpr double kTieTolerance = 1e-12;

/// A metalevel action: stop deliberating, or run computation `arm`.
/// For Bernoulli problems the computation index is the arm being sampled;
/// for generic MDPs it is the computation id.
class MetaAction {
public:
    static constexpr MetaAction stop() { return MetaAction{true, 0}; }
    static constexpr MetaAction sample(std::size_t arm) { return MetaAction{false, arm}; }

    constexpr bool is_stop() const { return stop_; }
    constexpr bool is_sample() const { return !stop_; }
    // Only meaningful when is_sample().
    constexpr std::size_t arm() const { return arm_; }

    friend constexpr bool operator==(const MetaAction&, const MetaAction&) = default;

    std::string to_string() const {
        return stop_ ? std::string("stop") : "sample(" + std::to_string(arm_) + ")";
    }

private:
    constexpr MetaAction(bool s, std::size_t a) : stop_(s), arm_(a) {}
    bool stop_;
    std::size_t arm_;
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent child seed; streams for (seed, a, b, ...) never
/// depend on how work is scheduled.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(splitmix64(seed) ^ (a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, Rest... rest) {
    return derive_seed(derive_seed(seed, a), static_cast<std::uint64_t>(rest)...);
}

/// mt19937_64 wrapper with platform-independent conversions (the standard
/// distributions are implementation-defined, so they are avoided here).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n), n > 0.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Parallel loop
// ---------------------------------------------------------------------------

inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, n) on `workers` threads. Callers write results
/// into slot i so aggregation order never depends on the worker count.
/// The first exception thrown by any body is rethrown on the caller.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace selcomp
