#include "ghbmp/haar_kernel.hpp"

#include <cmath>
#include <string>

namespace ghbmp {

KernelParam::KernelParam(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::invalid_argument("kernel exponent must lie in (0, 1), got " +
                                    std::to_string(lambda));
    }
}

void HaarIndex::validate() const {
    if (level > 62) {
        throw std::invalid_argument("Haar level " + std::to_string(level) + " too large");
    }
    const std::int64_t count = std::int64_t{1} << level;
    if (position < 0 || position >= count) {
        throw std::invalid_argument("Haar position " + std::to_string(position) +
                                    " outside [0, 2^" + std::to_string(level) + ")");
    }
}

double HaarIndex::left() const noexcept {
    return std::ldexp(static_cast<double>(position), -static_cast<int>(level));
}

double pos_pow(double y, double beta) noexcept {
    if (!(y > 0.0)) {
        return 0.0;
    }
    return std::pow(y, beta);
}

double haar_mother(double s) noexcept {
    if (s >= 0.0 && s < 0.5) {
        return 1.0;
    }
    if (s >= 0.5 && s < 1.0) {
        return -1.0;
    }
    return 0.0;
}

double haar_jk(const HaarIndex& idx, double s) {
    idx.validate();
    const int j = static_cast<int>(idx.level);
    const double scaled = std::ldexp(s, j) - static_cast<double>(idx.position);
    // 2^(j/2), exact for even j
    const double amplitude = (j % 2 == 0) ? std::ldexp(1.0, j / 2) : std::ldexp(std::sqrt(2.0), j / 2);
    return amplitude * haar_mother(scaled);
}

double kernel_unchecked(double lambda, double x) noexcept {
    if (!(x > 0.0)) {
        return 0.0;
    }
    const double a = lambda + 0.5;
    return (pos_pow(x, a) - 2.0 * pos_pow(x - 0.5, a) + pos_pow(x - 1.0, a)) / a;
}

double kernel(KernelParam lambda, double x) noexcept {
    return kernel_unchecked(lambda.value(), x);
}

double decay_bound(KernelParam lambda, double x, double c) noexcept {
    return c * std::pow(3.0 + std::abs(x), lambda.value() - 1.5);
}

}  // namespace ghbmp
