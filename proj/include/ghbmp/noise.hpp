#pragma once

#include <array>
#include <cstdint>

namespace ghbmp {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                      std::array<std::uint32_t, 2> key) noexcept;

/// Stateless addressable array of i.i.d. N(0, 1) deviates eps_{j,k}.
///
/// Each deviate is a pure function of (seed, j, k): the Philox block keyed on
/// the seed and indexed by (k, j) gives 53 uniform bits, which are pushed
/// through the inverse normal CDF. Evaluation order and thread schedule have
/// no influence on the values.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) noexcept : seed_(seed) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform deviate in the open interval (0, 1).
    [[nodiscard]] double uniform(unsigned level, std::uint64_t position) const noexcept;

    [[nodiscard]] double operator()(unsigned level, std::uint64_t position) const;

private:
    std::uint64_t seed_;
};

/// Phi^-1(u) for u in (0, 1).
[[nodiscard]] double inverse_normal_cdf(double u);

}  // namespace ghbmp
