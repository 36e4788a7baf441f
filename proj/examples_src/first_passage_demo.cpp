// Return to Z_p: solves for the first-passage density and walks G(s) toward s = 0.
#include <cstdio>

#include "padic_diffusion/first_passage.hpp"

int main() {
    using namespace padic_diffusion;
    const SpectralCache cache(ExponentialLandscape::normalize(SpaceParams(2, 1), -0.5, 1.0));

    const double h = 0.01;
    for (double horizon : {10.0, 50.0}) {
        const VolterraGrid grid = solve_first_passage(cache, h, horizon);
        std::printf("T = %5.1f  int_0^T f = %.6f  residual = %.2e\n", horizon, return_probability(grid),
                    volterra_residual(grid));
    }

    std::printf("\n%10s  %14s  %10s\n", "s", "G(s)", "F(s)");
    for (double s = 1e-1; s > 1e-9; s /= 10.0) {
        const double g = laplace_G(cache, s).value;
        std::printf("%10.1e  %14.6f  %10.8f\n", s, g, g / (1.0 + g));
    }
    return 0;
}
