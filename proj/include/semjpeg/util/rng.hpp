#pragma once

#include <cstdint>
#include <random>

namespace semjpeg {

// Seeded RNG wrapper. The mt19937_64 engine is fully specified by the
// standard, and the value mappings below avoid std::*_distribution, whose
// output is implementation-defined. Same seed => same stream everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here;
    // n is always tiny compared to 2^64 so the bias is negligible, but we
    // still use Lemire's method to keep the mapping exact and portable.
    std::uint64_t below(std::uint64_t n) {
        // 128-bit multiply-shift; no modulo bias rejection loop needed for
        // determinism, but keep it so draws are exactly uniform.
        while (true) {
            std::uint64_t x = eng_();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            std::uint64_t lo = static_cast<std::uint64_t>(m);
            if (lo >= n || lo >= (-n) % n) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // Derive an independent child stream; used to hand one seed per parallel
    // task so the reduction order, not the thread schedule, fixes the result.
    std::uint64_t fork_seed() { return eng_() ^ 0x9e3779b97f4a7c15ULL; }

private:
    std::mt19937_64 eng_;
};

} // namespace semjpeg
