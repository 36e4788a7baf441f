#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "padic_diffusion.hpp"

using namespace padic_diffusion;

namespace {

using DeskCache = SpectralCache<ExponentialLandscape>;

const DeskCache& desk_cache() {
    static const DeskCache cache(ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, 1.0), -40, 40);
    return cache;
}

const DeskCache& plane_cache() {
    static const DeskCache cache(ExponentialLandscape::normalize(SpaceParams(3, 2), -0.5, 1.0), -40, 40);
    return cache;
}

/// Generator of the jump chain on B_M / Z_p^n: rate J(p^d) into each coset at distance p^d, total exit rate C.
Eigen::MatrixXd chain_generator(const DeskCache& cache, const CosetChain& chain) {
    const auto& landscape = cache.kernel();
    const auto size = static_cast<Eigen::Index>(chain.size());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(size, size);
    std::vector<CosetPoint> points;
    for (std::size_t k = 0; k < chain.size(); ++k) points.push_back(chain.point(k));
    for (Eigen::Index a = 0; a < size; ++a) {
        for (Eigen::Index b = 0; b < size; ++b) {
            if (a == b) {
                q(a, b) = -landscape.exterior_mass(1);
            } else {
                const int d = coset_sub(points[static_cast<std::size_t>(b)], points[static_cast<std::size_t>(a)]).depth();
                q(a, b) = landscape.value(d);
            }
        }
    }
    return q;
}

Eigen::MatrixXd as_matrix(const std::vector<double>& flat, std::size_t size) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (std::size_t a = 0; a < size; ++a) {
        for (std::size_t b = 0; b < size; ++b) m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = flat[a * size + b];
    }
    return m;
}

double finite_difference(const auto& f, double t, double h = 1e-4) { return (f(t + h) - f(t - h)) / (2.0 * h); }

} // namespace

TEST(Ztilde, VanishesAtTimeZero) {
    for (int i = -5; i <= 10; ++i) EXPECT_EQ(ztilde(desk_cache(), NormExponent(i), 0.0), 0.0);
}

TEST(Ztilde, ZeroPointIsAnError) {
    EXPECT_THROW(ztilde(desk_cache(), NormExponent::zero(), 1.0), ZeroPoint);
}

TEST(Ztilde, UniformBoundTwoTOverVolume) {
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        const int n = cache->space().n();
        for (int i = 1; i <= 10; ++i) {
            for (double t : {0.1, 1.0, 10.0}) {
                EXPECT_LE(ztilde(*cache, NormExponent(i), t), 2.0 * t * std::pow(cache->space().p(), -n * i));
            }
        }
    }
}

TEST(Ztilde, NonNegativeOnAGrid) {
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        for (int i = -30; i <= 15; ++i) {
            for (double t : {1e-3, 0.1, 1.0, 7.0, 50.0}) {
                EXPECT_GE(ztilde(*cache, NormExponent(i), t), 0.0);
                EXPECT_GE(u_profile(*cache, NormExponent(i), t), 0.0);
            }
        }
    }
}

TEST(Ztilde, UnitBallIndicatorKernelHasClosedForm) {
    // Every jump lands uniformly in Z_p^n, so the density is 1 - e^{-t} there and 0 outside.
    const SpectralCache cache(TabulatedKernel::unit_ball_indicator(SpaceParams(2, 1)), -40, 40);
    for (double t : {0.1, 1.0, 5.0}) {
        for (int i = -6; i <= 0; ++i) EXPECT_NEAR(ztilde(cache, NormExponent(i), t), -std::expm1(-t), 1e-13);
        for (int i = 1; i <= 4; ++i) EXPECT_EQ(ztilde(cache, NormExponent(i), t), 0.0);
        EXPECT_NEAR(survival(cache, t), 1.0, 1e-15);
    }
}

TEST(Conservation, TotalMassIsOne) {
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        for (double t : {0.1, 0.5, 1.0, 5.0, 20.0}) {
            const MassAudit audit = mass_audit(*cache, t);
            EXPECT_LT(audit.defect, 1e-8) << "t=" << t << " window [" << audit.i_lo << ", " << audit.i_hi << "]";
            EXPECT_NEAR(audit.continuous_mass, -std::expm1(-t), 1e-8);
        }
    }
}

TEST(UProfile, InitialCondition) {
    const auto& cache = desk_cache();
    EXPECT_EQ(u_profile(cache, NormExponent::inside_unit_ball(), 0.0), 1.0);
    for (int i = -3; i <= 0; ++i) EXPECT_EQ(u_profile(cache, NormExponent(i), 0.0), 1.0);
    for (int i = 1; i <= 5; ++i) EXPECT_EQ(u_profile(cache, NormExponent(i), 0.0), 0.0);
}

TEST(UProfile, ConstantOnTheUnitBall) {
    const auto& cache = desk_cache();
    for (double t : {0.3, 2.0}) {
        const double inside = u_profile(cache, NormExponent::inside_unit_ball(), t);
        for (int i = -10; i <= 0; ++i) EXPECT_EQ(u_profile(cache, NormExponent(i), t), inside);
    }
}

TEST(UProfile, MatchesMatrixExponentialOnCosetChain) {
    const auto& cache = desk_cache();
    const CosetChain chain(cache.space(), 8);
    const Eigen::MatrixXd q = chain_generator(cache, chain);
    for (double t : {0.5, 1.0, 3.0}) {
        const Eigen::MatrixXd p = (q * t).exp();
        const std::size_t sphere_one = chain.index_of(CosetPoint::from_digits(cache.space(), {{1}}));
        EXPECT_NEAR(u_profile(cache, NormExponent(1), t), p(0, static_cast<Eigen::Index>(sphere_one)), 1e-6);
        EXPECT_NEAR(survival(cache, t), p(0, 0), 1e-6);
        const Eigen::MatrixXd analytic = as_matrix(transition_matrix(cache, chain, t), chain.size());
        EXPECT_LT((analytic - p).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t;
    }
}

TEST(UProfile, MatchesMatrixExponentialInTwoDimensions) {
    const auto& cache = plane_cache();
    const CosetChain chain(cache.space(), 2);
    const Eigen::MatrixXd p = (chain_generator(cache, chain) * 1.0).exp();
    const Eigen::MatrixXd analytic = as_matrix(transition_matrix(cache, chain, 1.0), chain.size());
    EXPECT_LT((analytic - p).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Survival, StartsAtOneAndStaysInRange) {
    const auto& cache = desk_cache();
    EXPECT_EQ(survival(cache, 0.0), 1.0);
    for (double t : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double s = survival(cache, t);
        EXPECT_GT(s, 0.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Survival, GronwallLowerBound) {
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        const double c = exit_rate(*cache);
        EXPECT_GT(c, 0.0);
        EXPECT_LE(c, 1.0);
        for (double t : {0.1, 1.0, 5.0}) EXPECT_GE(survival(*cache, t), std::exp(-c * t));
    }
}

TEST(Survival, ExitRateMatchesJumpMassOutside) {
    const auto& cache = desk_cache();
    double c = 0.0;
    for (int i = 1; i <= 30; ++i) c += cache.kernel().value(i) * sphere_volume(cache.space(), i);
    EXPECT_NEAR(exit_rate(cache), c, 1e-15);
}

TEST(Survival, DerivativeEqualsReturnFluxMinusLeak) {
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        const double c = exit_rate(*cache);
        for (double t : {0.5, 1.0, 2.0}) {
            const double fd = finite_difference([&](double s) { return survival(*cache, s); }, t);
            EXPECT_NEAR(fd, g_of_t(*cache, t) - c * survival(*cache, t), 1e-6) << "t=" << t;
        }
    }
}

TEST(DuDt, InitialLeakageIsNegativeSeries) {
    const auto& cache = desk_cache();
    double expected = 0.0;
    for (int j = 0; j < 200; ++j) expected -= sphere_volume(cache.space(), -j) * cache.one_minus(-j);
    const double value = du_dt(cache, NormExponent::inside_unit_ball(), 0.0);
    EXPECT_LT(value, 0.0);
    EXPECT_NEAR(value, expected, 1e-14);
}

TEST(DuDt, MatchesFiniteDifferences) {
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        for (NormExponent i : {NormExponent::inside_unit_ball(), NormExponent(1), NormExponent(2), NormExponent(4)}) {
            for (double t : {0.3, 1.0, 4.0}) {
                const double fd = finite_difference([&](double s) { return u_profile(*cache, i, s); }, t);
                EXPECT_NEAR(du_dt(*cache, i, t), fd, 1e-6);
            }
        }
    }
}

TEST(DuDt, DecaysAndTracksFiniteDifferenceAtLargeTime) {
    const auto& cache = desk_cache();
    for (NormExponent i : {NormExponent::inside_unit_ball(), NormExponent(1), NormExponent(3)}) {
        double previous = INFINITY;
        for (double t : {10.0, 100.0, 1000.0}) {
            const double rate = du_dt(cache, i, t);
            const double h = 1e-2 * t;
            const double fd = (u_profile(cache, i, t + h) - u_profile(cache, i, t - h)) / (2 * h);
            EXPECT_NEAR(rate, fd, 1e-3 * std::abs(rate) + 1e-12) << "t=" << t;
            EXPECT_LT(std::abs(rate), previous) << "t=" << t;
            previous = std::abs(rate);
        }
    }
}

TEST(PdeResidual, TwentySamplePoints) {
    const std::vector<NormExponent> norms{NormExponent::inside_unit_ball(), NormExponent(1), NormExponent(2),
                                          NormExponent(3), NormExponent(5)};
    for (const DeskCache* cache : {&desk_cache(), &plane_cache()}) {
        int points = 0;
        for (const NormExponent& i : norms) {
            for (double t : {0.1, 0.5, 2.0, 8.0}) {
                const double residual = du_dt(*cache, i, t) - (convolve_with_kernel(*cache, i, t) - u_profile(*cache, i, t));
                EXPECT_LT(std::abs(residual), 1e-6);
                ++points;
            }
        }
        EXPECT_EQ(points, 20);
    }
}

TEST(PdeResidual, ConvolutionMatchesChainGenerator) {
    // J ∗ u - u equals the generator applied to u on the chain, up to mass beyond the chain.
    const auto& cache = desk_cache();
    const CosetChain chain(cache.space(), 8);
    const Eigen::MatrixXd q = chain_generator(cache, chain);
    const double t = 1.0;
    Eigen::VectorXd u(static_cast<Eigen::Index>(chain.size()));
    for (std::size_t k = 0; k < chain.size(); ++k) {
        u(static_cast<Eigen::Index>(k)) = u_profile(cache, chain.point(k).norm_exponent(), t);
    }
    const Eigen::VectorXd qu = q * u;
    for (int depth = 0; depth <= 3; ++depth) {
        const std::size_t idx = depth == 0 ? 0 : (std::size_t{1} << (depth - 1));
        const NormExponent i = chain.point(idx).norm_exponent();
        EXPECT_NEAR(qu(static_cast<Eigen::Index>(idx)), convolve_with_kernel(cache, i, t) - u_profile(cache, i, t), 1e-9);
    }
}

TEST(TransitionProb, IndicatorAtTimeZero) {
    const SpaceParams space(2, 1);
    const CosetPoint origin(space);
    const CosetPoint half = CosetPoint::from_digits(space, {{1}});
    EXPECT_EQ(transition_prob(desk_cache(), origin, {origin, 0}, 0.0), 1.0);
    EXPECT_EQ(transition_prob(desk_cache(), half, {origin, 0}, 0.0), 0.0);
    EXPECT_EQ(transition_prob(desk_cache(), half, {origin, 1}, 0.0), 1.0);
}

TEST(TransitionProb, UnitBallFromOriginIsSurvival) {
    const CosetPoint origin(SpaceParams(2, 1));
    for (double t : {0.2, 1.0, 6.0}) {
        EXPECT_NEAR(transition_prob(desk_cache(), origin, {origin, 0}, t), survival(desk_cache(), t), 1e-12);
    }
}

TEST(TransitionProb, BallsPartitionConsistently) {
    const auto& cache = desk_cache();
    const SpaceParams& space = cache.space();
    const CosetPoint origin(space);
    const double t = 1.3;
    // Z_p = B_{-1} ∪ S_0 seen from the origin.
    EXPECT_NEAR(transition_prob(cache, origin, {origin, 0}, t),
                transition_prob(cache, origin, {origin, -1}, t) + sphere_volume(space, 0) * ztilde(cache, NormExponent(0), t),
                1e-13);
    // B_3 is the union of its eight cosets.
    const CosetChain chain(space, 3);
    double total = 0.0;
    for (std::size_t k = 0; k < chain.size(); ++k) total += transition_prob(cache, origin, {chain.point(k), 0}, t);
    EXPECT_NEAR(total, transition_prob(cache, origin, {origin, 3}, t), 1e-13);
}

TEST(TransitionProb, DistantBallIsVolumeTimesDensity) {
    const auto& cache = desk_cache();
    const SpaceParams& space = cache.space();
    const CosetPoint x = CosetPoint::from_digits(space, {{0, 0, 1}});
    EXPECT_NEAR(transition_prob(cache, x, {CosetPoint(space), 1}, 2.0), 2.0 * ztilde(cache, NormExponent(3), 2.0), 1e-15);
}

TEST(TransitionProb, ProbabilitiesStayInUnitInterval) {
    const auto& cache = plane_cache();
    const CosetChain chain(cache.space(), 2);
    for (std::size_t a = 0; a < chain.size(); a += 7) {
        for (int r = -3; r <= 3; ++r) {
            const double value = transition_prob(cache, chain.point(a), {CosetPoint(cache.space()), r}, 0.8);
            EXPECT_GE(value, 0.0);
            EXPECT_LE(value, 1.0);
        }
    }
}

TEST(TransitionProb, BallBeyondDepthCapIsUnsupported) {
    const CosetPoint origin(SpaceParams(2, 1));
    EXPECT_THROW(transition_prob(desk_cache(), origin, {origin, kDefaultDepthCap + 1}, 1.0), UnsupportedBall);
    EXPECT_THROW(transition_prob(desk_cache(), origin, {origin, -kDefaultDepthCap - 1}, 1.0), UnsupportedBall);
}

TEST(ChapmanKolmogorov, TruncatedChainSemigroup) {
    for (auto [cache, radius] : {std::pair{&desk_cache(), 6}, std::pair{&plane_cache(), 2}}) {
        const CosetChain chain(cache->space(), radius);
        for (auto [t, s] : {std::pair{0.5, 0.5}, std::pair{1.0, 2.0}}) {
            const Eigen::MatrixXd pt = as_matrix(transition_matrix(*cache, chain, t), chain.size());
            const Eigen::MatrixXd ps = as_matrix(transition_matrix(*cache, chain, s), chain.size());
            const Eigen::MatrixXd pts = as_matrix(transition_matrix(*cache, chain, t + s), chain.size());
            EXPECT_LT((pts - pt * ps).cwiseAbs().maxCoeff(), 1e-6) << "t=" << t << " s=" << s;
        }
    }
}

TEST(DecayBounds, HoldOnTheDeskGrid) {
    std::vector<int> xs;
    for (int i = 2; i <= 12; ++i) xs.push_back(i);
    const DecayBoundReport report = decay_bound_check(desk_cache(), 2, xs, {0.1, 1.0, 10.0});
    EXPECT_EQ(report.rows.size(), 33u);
    EXPECT_TRUE(report.uniform_holds());
    EXPECT_TRUE(report.claim_holds());
    EXPECT_TRUE(report.decay_holds());
    EXPECT_GT(report.c0, 0.0);
}

TEST(DecayBounds, HoldInTwoDimensions) {
    const DecayBoundReport report = decay_bound_check(plane_cache(), 1, {1, 2, 3, 4, 5}, {0.1, 1.0, 10.0});
    EXPECT_TRUE(report.uniform_holds());
    EXPECT_TRUE(report.claim_holds());
    EXPECT_TRUE(report.decay_holds());
}

TEST(DecayBounds, VacuousAtTimeZero) {
    const DecayBoundReport report = decay_bound_check(desk_cache(), 2, {2, 5}, {0.0});
    for (const auto& row : report.rows) EXPECT_EQ(row.log_ztilde, -INFINITY);
    EXPECT_TRUE(report.decay_holds());
}

TEST(DecayBounds, NeedNegativeGamma) {
    const SpectralCache cache(ExponentialLandscape::normalize(SpaceParams(2, 1), 0.5, 1.0), -40, 40);
    EXPECT_THROW(decay_bound_check(cache, 2, {2}, {1.0}), GammaOutOfRange);
}

TEST(LogLe, AllowsOnlyRoundingSlack) {
    EXPECT_TRUE(log_le(-INFINITY, -5.0));
    EXPECT_TRUE(log_le(-10.0, -10.0 + 1e-3));
    EXPECT_TRUE(log_le(-10.0 + 1e-14, -10.0));
    EXPECT_FALSE(log_le(-10.0 + 1e-9, -10.0));
}
