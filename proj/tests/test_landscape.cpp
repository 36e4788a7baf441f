#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "padic_diffusion/landscape.hpp"
#include "padic_diffusion/rng.hpp"
#include "padic_diffusion/spectral.hpp"
#include "padic_diffusion/tabulated_kernel.hpp"

using namespace padic_diffusion;

namespace {

ExponentialLandscape desk() { return ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, 1.0); }

long double raw_term(int p, int n, double gamma, double c1, int j) {
    const long double pj = std::pow(static_cast<long double>(p), j);
    return std::pow(pj, static_cast<long double>(gamma + n)) * std::exp(-c1 * pj) *
           (1.0L - std::pow(static_cast<long double>(p), -n));
}

/// Σ_j p^{jγ} e^{-C₁p^j} vol(S_j) summed over a fixed wide range in the given direction.
long double raw_mass_by_summation(int p, int n, double gamma, double c1, bool ascending) {
    const int lo = -4000;
    const int hi = 80;
    long double sum = 0.0L;
    if (ascending) {
        for (int j = lo; j <= hi; ++j) sum += raw_term(p, n, gamma, c1, j);
    } else {
        for (int j = hi; j >= lo; --j) sum += raw_term(p, n, gamma, c1, j);
    }
    return sum;
}

/// Ĵ(p^k) = Σ_j J(p^j) ∫_{S_j} χ_p(-x·ξ) dⁿx, the Fourier integral sphere by sphere.
template <class Kernel>
double spectral_by_quadrature(const Kernel& kernel, int k, int j_lo, int j_hi) {
    double sum = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
        const double lv = kernel.log_value(j);
        if (lv == -INFINITY) continue;
        sum += std::exp(lv) * character_sphere_integral(kernel.space(), NormExponent(k), j);
    }
    return sum;
}

} // namespace

TEST(Normalize, MatchesAscendingAndDescendingSums) {
    const auto landscape = ExponentialLandscape::normalize(SpaceParams(2, 1), 0.0, 1.0);
    const long double up = raw_mass_by_summation(2, 1, 0.0, 1.0, true);
    const long double down = raw_mass_by_summation(2, 1, 0.0, 1.0, false);
    EXPECT_NEAR(static_cast<double>(up / down), 1.0, 1e-12);
    EXPECT_NEAR(landscape.norm_const() * static_cast<double>(up), 1.0, 1e-12);
    EXPECT_GT(landscape.norm_const(), 0.0);
}

TEST(Normalize, MatchesDirectSumsAcrossParameters) {
    struct Case {
        int p, n;
        double gamma, c1;
    };
    for (const Case& c : {Case{2, 1, -0.5, 1.0}, Case{3, 2, -1.5, 2.0}, Case{5, 1, 1.0, 0.3}, Case{2, 3, -2.9, 1.0},
                          Case{7, 2, 0.25, 10.0}}) {
        SCOPED_TRACE(::testing::Message() << "p=" << c.p << " n=" << c.n << " gamma=" << c.gamma);
        const auto landscape = ExponentialLandscape::normalize(SpaceParams(c.p, c.n), c.gamma, c.c1);
        const long double direct = raw_mass_by_summation(c.p, c.n, c.gamma, c.c1, false);
        EXPECT_NEAR(landscape.norm_const() * static_cast<double>(direct), 1.0, 1e-12);
    }
}

TEST(Normalize, TotalMassIsOne) {
    for (double gamma : {-0.9, -0.5, 0.0, 2.0}) {
        const auto landscape = ExponentialLandscape::normalize(SpaceParams(2, 1), gamma, 1.0);
        double total = 0.0;
        for (int j = landscape.window_lo() - 200; j <= landscape.window_hi() + 10; ++j) {
            total += j_value(landscape, NormExponent(j)) * sphere_volume(landscape.space(), j);
        }
        EXPECT_NEAR(total, 1.0, 1e-10) << "gamma=" << gamma;
    }
}

TEST(Normalize, RejectsGammaAtOrBelowMinusN) {
    EXPECT_THROW(ExponentialLandscape::normalize(SpaceParams(2, 1), -1.0, 1.0), GammaOutOfRange);
    EXPECT_THROW(ExponentialLandscape::normalize(SpaceParams(3, 2), -2.5, 1.0), GammaOutOfRange);
    EXPECT_NO_THROW(ExponentialLandscape::normalize(SpaceParams(3, 2), -1.5, 1.0));
}

TEST(Normalize, RejectsNonPositiveRate) {
    EXPECT_THROW(ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, 0.0), NonPositiveRate);
    EXPECT_THROW(ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, -1.0), NonPositiveRate);
}

TEST(Normalize, DoublingRateShrinksRawMass) {
    double previous = INFINITY;
    for (double c1 : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double raw = ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, c1).raw_mass();
        EXPECT_LT(raw, previous);
        previous = raw;
    }
}

TEST(JValue, AtNormOne) {
    const auto landscape = desk();
    EXPECT_NEAR(j_value(landscape, NormExponent(0)), landscape.norm_const() * std::exp(-1.0), 1e-15);
}

TEST(JValue, NonNegativeOnRandomExponents) {
    const auto landscape = desk();
    StreamRng rng(3);
    for (int k = 0; k < 1000; ++k) {
        const int j = static_cast<int>(rng.uniform_below(81)) - 40;
        EXPECT_GE(j_value(landscape, NormExponent(j)), 0.0);
    }
}

TEST(JValue, DecaysMonotonicallyBeyondTheMode) {
    const auto landscape = ExponentialLandscape::normalize(SpaceParams(2, 1), 1.5, 1.0);
    for (int j = 1; j < 40; ++j) {
        EXPECT_LE(landscape.log_value(j + 1), landscape.log_value(j)) << j;
    }
    EXPECT_EQ(landscape.value(40), 0.0);
}

TEST(JValue, ExteriorAndInteriorMassesAddToOne) {
    const auto landscape = desk();
    for (int a = -30; a <= 6; ++a) {
        EXPECT_NEAR(landscape.exterior_mass(a) + landscape.interior_mass(a), 1.0, 1e-13) << a;
    }
}

TEST(Spectral, UnitBallIndicatorIsSelfDual) {
    for (auto [p, n] : {std::pair{2, 1}, std::pair{3, 2}}) {
        const auto indicator = TabulatedKernel::unit_ball_indicator(SpaceParams(p, n));
        for (int k = -10; k <= 10; ++k) {
            const double expected = k <= 0 ? 1.0 : 0.0;
            EXPECT_NEAR(spectral(indicator, k), expected, 1e-12) << "k=" << k;
            EXPECT_NEAR(spectral_by_quadrature(indicator, k, -200, 0) + ball_volume(indicator.space(), -201), expected,
                        1e-12);
        }
    }
}

TEST(Spectral, AgreesWithCharacterSumQuadrature) {
    const auto landscape = desk();
    for (int k = -3; k <= 3; ++k) {
        const double oracle = spectral_by_quadrature(landscape, k, -200, landscape.window_hi() + 5);
        EXPECT_NEAR(spectral(landscape, k), oracle, 1e-10) << "k=" << k;
    }
}

TEST(Spectral, AgreesWithQuadratureInHigherDimension) {
    const auto landscape = ExponentialLandscape::normalize(SpaceParams(3, 2), -1.2, 0.7);
    for (int k = -4; k <= 4; ++k) {
        const double oracle = spectral_by_quadrature(landscape, k, -200, landscape.window_hi() + 5);
        EXPECT_NEAR(spectral(landscape, k), oracle, 1e-10) << "k=" << k;
    }
}

TEST(Spectral, TendsToOneAtTheOrigin) {
    const SpectralCache cache(desk(), -40, 40);
    EXPECT_GT(cache.value(-40), 1.0 - 1e-6);
}

TEST(Spectral, RangeAndNonNegativeGapOverTheWindow) {
    for (auto [p, n, gamma, c1] : {std::tuple{2, 1, -0.5, 1.0}, std::tuple{3, 2, -1.9, 0.2}, std::tuple{5, 1, 3.0, 5.0},
                                   std::tuple{2, 2, 0.0, 1.0}}) {
        const SpectralCache cache(ExponentialLandscape::normalize(SpaceParams(p, n), gamma, c1), -40, 40);
        for (int k = -40; k <= 40; ++k) {
            EXPECT_GE(cache.value(k), -1.0);
            EXPECT_LE(cache.value(k), 1.0);
            EXPECT_GE(cache.one_minus(k), 0.0);
            EXPECT_NEAR(cache.one_minus(k), 1.0 - cache.value(k), 1e-13);
        }
    }
}

TEST(Spectral, IncreasesTowardOneBelowTheModeScale) {
    const SpectralCache cache(desk(), -40, 40);
    for (int k = -40; k < 0; ++k) EXPECT_GE(cache.value(k), cache.value(k + 1)) << k;
}

TEST(Spectral, OneMinusDifferenceMatchesDirectDifference) {
    const SpectralCache cache(desk(), -40, 40);
    for (int a = -10; a <= 10; ++a) {
        for (int b = -10; b <= 10; ++b) {
            EXPECT_NEAR(cache.one_minus_difference(b, a), cache.one_minus(b) - cache.one_minus(a), 1e-15);
        }
    }
}

TEST(Spectral, CacheMatchesDirectEvaluationOutsideTheTable) {
    const auto landscape = desk();
    const SpectralCache cache(landscape, -5, 5);
    EXPECT_EQ(cache.value(-20), spectral(landscape, -20));
    EXPECT_EQ(cache.value(12), spectral(landscape, 12));
}

TEST(SpectralGapAtOne, PositiveAndMatchesSpectralAtZero) {
    const auto landscape = desk();
    const double gap = spectral_gap_at_one(landscape);
    EXPECT_GT(gap, 0.0);
    EXPECT_NEAR(gap, 1.0 - spectral(landscape, 0), 1e-10);
    for (double gamma : {-0.9, 0.0, 2.0}) {
        for (double c1 : {0.1, 1.0, 10.0}) {
            const auto other = ExponentialLandscape::normalize(SpaceParams(3, 1), gamma, c1);
            EXPECT_GT(spectral_gap_at_one(other), 0.0);
            EXPECT_NEAR(spectral_gap_at_one(other), 1.0 - spectral(other, 0), 1e-10);
        }
    }
}

TEST(SpectralGapAtOne, ExteriorTermShrinksAsRateGrows) {
    double previous = INFINITY;
    for (double c1 : {1.0, 4.0, 16.0}) {
        const auto landscape = ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, c1);
        const double exterior = spectral_gap_at_one(landscape) - landscape.value(1);
        EXPECT_GT(exterior, 0.0);
        EXPECT_LT(exterior, previous);
        previous = exterior;
    }
    EXPECT_LT(previous, 1e-10);
}

TEST(SpectralBound, HoldsOnTheDeskWindow) {
    const SpectralCache cache(desk(), -40, 40);
    const auto report = check_spectral_upper_bound(cache, -20, 0);
    EXPECT_EQ(report.rows.size(), 21u);
    EXPECT_TRUE(report.all_hold());
    for (const auto& row : report.rows) EXPECT_GE(row.log_margin, 0.0) << "k=" << row.k;
}

TEST(SpectralBound, HoldsAcrossParameters) {
    for (auto [p, n, gamma, c1] : {std::tuple{3, 2, -1.9, 0.2}, std::tuple{2, 3, -0.1, 3.0}, std::tuple{5, 1, -0.7, 1.0}}) {
        const SpectralCache cache(ExponentialLandscape::normalize(SpaceParams(p, n), gamma, c1), -40, 40);
        EXPECT_TRUE(check_spectral_upper_bound(cache, -20, 5).all_hold()) << "p=" << p << " n=" << n;
    }
}

TEST(SpectralBound, RejectsGammaOutsideNegativeRange) {
    const SpectralCache cache(ExponentialLandscape::normalize(SpaceParams(2, 1), 0.5, 1.0), -10, 10);
    EXPECT_THROW(check_spectral_upper_bound(cache, -5, 0), GammaOutOfRange);
    EXPECT_THROW(divergence_diagnostic(cache, 20), GammaOutOfRange);
}

TEST(Divergence, DeskParamsDiverge) {
    const SpectralCache cache(desk(), -40, 40);
    const auto report = divergence_diagnostic(cache, 20);
    EXPECT_EQ(report.verdict, DivergenceVerdict::diverges);
    ASSERT_EQ(report.partial_log_sums.size(), 21u);
    for (std::size_t j = 1; j < report.partial_log_sums.size(); ++j) {
        EXPECT_GT(report.partial_log_sums[j], report.partial_log_sums[j - 1]);
    }
    EXPECT_GT(report.partial_log_sums[20], report.partial_log_sums[10] + 10.0);
}

TEST(Divergence, TermsDominateTheClosedFormLowerBound) {
    const SpectralCache cache(desk(), -60, 40);
    const auto report = divergence_diagnostic(cache, 30);
    for (std::size_t j = 0; j < report.log_terms.size(); ++j) {
        EXPECT_GE(report.log_terms[j], report.lower_bound_log_terms[j] - 1e-9) << j;
    }
    // The lower bound's increments are C₁p^{j+1} minus bounded corrections, so they blow up.
    for (std::size_t j = 10; j + 1 < report.log_terms.size(); ++j) {
        const double bound_step = report.lower_bound_log_terms[j + 1] - report.lower_bound_log_terms[j];
        EXPECT_GT(bound_step, std::exp2(static_cast<double>(j + 1)) - 5.0);
        EXPECT_GT(report.log_terms[j + 1] - report.log_terms[j], 0.5 * bound_step);
    }
}

TEST(Divergence, ShortLadderIsInconclusive) {
    const SpectralCache cache(desk(), -40, 40);
    EXPECT_EQ(divergence_diagnostic(cache, 3).verdict, DivergenceVerdict::inconclusive);
}

TEST(NonintegrableDemo, IncrementsApproachOneMinusInversePrime) {
    const auto sums = nonintegrable_partial_sums(SpaceParams(2, 1), 1.0, 100);
    ASSERT_EQ(sums.size(), 101u);
    EXPECT_NEAR(sums[100] - sums[99], 0.5, 1e-12);
    EXPECT_GE(sums[100], 0.9 * 0.5 * 100);
}

TEST(NonintegrableDemo, ZeroRateIsExactlyLinear) {
    const auto sums = nonintegrable_partial_sums(SpaceParams(3, 1), 0.0, 50);
    for (std::size_t m = 0; m < sums.size(); ++m) {
        EXPECT_NEAR(sums[m], (2.0 / 3.0) * static_cast<double>(m + 1), 1e-12);
    }
}

TEST(NonintegrableDemo, OnlyOneDimensional) {
    EXPECT_THROW(nonintegrable_partial_sums(SpaceParams(2, 2), 1.0, 10), std::invalid_argument);
}
