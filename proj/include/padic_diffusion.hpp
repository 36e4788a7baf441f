#pragma once

#include "padic_diffusion/coset.hpp"
#include "padic_diffusion/errors.hpp"
#include "padic_diffusion/first_passage.hpp"
#include "padic_diffusion/heat_kernel.hpp"
#include "padic_diffusion/landscape.hpp"
#include "padic_diffusion/levy_sim.hpp"
#include "padic_diffusion/rng.hpp"
#include "padic_diffusion/spectral.hpp"
#include "padic_diffusion/tabulated_kernel.hpp"
#include "padic_diffusion/ultrametric.hpp"
