#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace padic_diffusion::detail {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log(e^a + e^b) without overflow; either argument may be -inf.
inline double log_add(double a, double b) noexcept {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

/// Running sum of positive terms given by their logarithms.
class LogAccumulator {
public:
    void add(double log_term) noexcept { value_ = log_add(value_, log_term); }
    double log() const noexcept { return value_; }
    double value() const noexcept { return std::exp(value_); }

private:
    double value_ = neg_inf;
};

} // namespace padic_diffusion::detail
