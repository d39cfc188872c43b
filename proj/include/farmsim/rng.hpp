#pragma once

#include <cstdint>
#include <string_view>

namespace farmsim {

/// Counter-based random stream. The nth output is a pure function of
/// (seed, component, entity, n): draws on one stream never shift another,
/// so adding entities or reordering unrelated draws cannot perturb results.
class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t seed, std::string_view component, std::uint64_t entity);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double next_unit();

    /// Gaussian via Box-Muller; consumes exactly two uniforms per call.
    double next_gaussian(double mean, double sd);

    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t base_ = 0;
    std::uint64_t counter_ = 0;
};

/// Factory carrying the run seed; hands out independent named streams.
struct RngStreams {
    std::uint64_t seed = 0;

    RngStream stream(std::string_view component, std::uint64_t entity) const {
        return RngStream(seed, component, entity);
    }
};

} // namespace farmsim
