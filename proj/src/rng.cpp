#include "farmsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace farmsim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view component, std::uint64_t entity) {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h ^ fnv1a(component));
    base_ = mix64(h ^ (entity * kGolden + 1));
}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(base_ + counter_ * kGolden);
}

double RngStream::next_unit() {
    // 53 mantissa bits, value in [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian(double mean, double sd) {
    double u1 = next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log1p(-u1)); // log(1-u1), never log(0)
    double z = r * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sd * z;
}

} // namespace farmsim
