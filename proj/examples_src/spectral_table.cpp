// Prints Ĵ(p^k) and the gap 1 - Ĵ(p^k) for a small landscape.
#include <cstdio>
#include <cstdlib>

#include "padic_diffusion/spectral.hpp"

int main(int argc, char** argv) {
    using namespace padic_diffusion;
    const int p = argc > 1 ? std::atoi(argv[1]) : 2;
    const int n = argc > 2 ? std::atoi(argv[2]) : 1;
    const double gamma = argc > 3 ? std::atof(argv[3]) : -0.5;
    const double c1 = argc > 4 ? std::atof(argv[4]) : 1.0;

    const auto landscape = ExponentialLandscape::normalize(SpaceParams(p, n), gamma, c1);
    const SpectralCache cache(landscape, -12, 12);
    std::printf("norm_const = %.12g, exit rate = %.12g\n", landscape.norm_const(), landscape.exit_rate());
    std::printf("%4s  %22s  %22s\n", "k", "jhat", "1 - jhat");
    for (int k = cache.k_min(); k <= cache.k_max(); ++k) {
        std::printf("%4d  %22.15e  %22.15e\n", k, cache.value(k), cache.one_minus(k));
    }
    std::printf("1 - jhat(1) by the closed form: %.15e\n", spectral_gap_at_one(landscape));
    return 0;
}
