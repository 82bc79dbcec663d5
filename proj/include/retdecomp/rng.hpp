#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace retdecomp {

/// Deterministic random stream. Every consumer (environment, Gumbel noise,
/// policy exploration, parameter init) owns its own stream derived from the
/// run seed and a stream name, so adding draws in one place never shifts
/// another.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Child stream keyed by (seed, name).
    static Rng stream(std::uint64_t seed, std::string_view name);

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal() { return normal_(engine_); }
    double normal(double mean, double std) { return mean + std * normal_(engine_); }
    /// Standard Gumbel(0, 1) draw.
    double gumbel();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t next_u64() { return engine_(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace retdecomp
