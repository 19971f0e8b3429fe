#pragma once

#include <cstdint>
#include <stdexcept>

namespace ghbmp {

/// Envelope constant for |kernel(l, x)| <= c (3 + |x|)^(l - 3/2).
///
/// A dense scan over l in (0, 1) and x in [-5, 100] puts the supremum of the
/// ratio just below 9.27 (attained as l -> 0 near x = 1/2); 16 is the next
/// power of two. The unit tests re-run the scan and fail if this stops
/// holding.
inline constexpr double kEnvelopeConstant = 16.0;

/// Exponent of the fractional Haar kernel. Must lie strictly inside (0, 1).
class KernelParam {
public:
    explicit KernelParam(double lambda);

    [[nodiscard]] double value() const noexcept { return lambda_; }

private:
    double lambda_;
};

/// Dyadic index (j, k) of a Haar function, 0 <= k < 2^j.
struct HaarIndex {
    unsigned level = 0;
    std::int64_t position = 0;

    /// Throws std::invalid_argument when k is outside [0, 2^j).
    void validate() const;

    [[nodiscard]] double left() const noexcept;  // k / 2^j
};

/// (y)_+^beta: y^beta for y > 0, zero otherwise (including y == 0).
[[nodiscard]] double pos_pow(double y, double beta) noexcept;

/// Haar mother wavelet, 1 on [0, 1/2), -1 on [1/2, 1), 0 elsewhere.
[[nodiscard]] double haar_mother(double s) noexcept;

/// 2^(j/2) h(2^j s - k).
[[nodiscard]] double haar_jk(const HaarIndex& idx, double s);

/// Closed form of the fractional Haar kernel
///   h^[l](x) = (l + 1/2)^-1 ((x)_+^a - 2 (x - 1/2)_+^a + (x - 1)_+^a),  a = l + 1/2.
/// Identically zero for x <= 0.
[[nodiscard]] double kernel(KernelParam lambda, double x) noexcept;

/// Same as kernel() without constructing a KernelParam; used in hot loops
/// where the exponent is already known to be valid.
[[nodiscard]] double kernel_unchecked(double lambda, double x) noexcept;

/// c (3 + |x|)^(l - 3/2).
[[nodiscard]] double decay_bound(KernelParam lambda, double x, double c = kEnvelopeConstant) noexcept;

}  // namespace ghbmp
