#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace relief {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Hash a seed with a list of keys into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept;

/// Named substream of a master seed ("training", "evaluation", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double to_unit_interval(std::uint64_t bits) noexcept;

/// Standard normal draw that is a pure function of `key`.
double standard_normal_at(std::uint64_t key) noexcept;

/// Sequential generator. The engine is std::mt19937_64; the distributions are
/// implemented here so that streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform01() { return to_unit_interval(engine_()); }

    /// Uniform integer in [lo, hi].
    int uniform_int(int lo, int hi);

    double normal(double mean, double stddev);

private:
    std::mt19937_64 engine_;
};

}  // namespace relief
