#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mstatic {

/// Seeded random stream used by all simulation code.
///
/// Gaussian variates come from an explicit Box-Muller transform instead of
/// std::normal_distribution, whose output is implementation-defined; a given
/// seed therefore produces the same draw sequence on every platform and
/// under every thread schedule.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for one Monte Carlo trial.
    static RandomStream for_trial(std::uint64_t master_seed, std::uint64_t trial_index) {
        return RandomStream(split_mix64(master_seed + 0x9E3779B97F4A7C15ULL * (trial_index + 1)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal variate. Pairs are generated together; the second one
    /// is cached, so draw order is part of the determinism contract.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * pi_ * u2;
        cached_ = r * std::sin(t);
        has_cached_ = true;
        return r * std::cos(t);
    }

    /// Circular complex Gaussian with total variance `variance`
    /// (variance/2 in the real part, variance/2 in the imaginary part).
    std::complex<double> complex_gaussian(double variance) {
        const double s = std::sqrt(variance / 2.0);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

    static std::uint64_t split_mix64(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

private:
    static constexpr double pi_ = 3.14159265358979323846;
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace mstatic
