#include "relief/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace relief {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
    return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) noexcept {
    // FNV-1a over the name, then mixed with the seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(seed, {h});
}

double to_unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double standard_normal_at(std::uint64_t key) noexcept {
    // Box-Muller on two uniforms derived from the key; u1 in (0, 1]
    const double u1 = 1.0 - to_unit_interval(mix64(key ^ 0x5851f42d4c957f2dULL));
    const double u2 = to_unit_interval(mix64(key ^ 0x14057b7ef767814fULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::uniform_int(int lo, int hi) {
    const auto range = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    // rejection sampling to avoid modulo bias
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return lo + static_cast<int>(draw % range);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * standard_normal_at(engine_());
}

}  // namespace relief
