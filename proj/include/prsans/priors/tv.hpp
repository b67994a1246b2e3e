#pragma once

#include <vector>

namespace prsans::priors {

// Anisotropic total-variation proximal map
//   argmin_x 0.5 ||x - z||^2 + strength * TV(x)
// solved in the dual: projected gradient on the box ||p||_inf <= 1 with
// fixed step 1/8 (1 over the gradient operator norm squared). Forward
// differences, replicated boundary. strength 0 returns z unchanged.
struct TvOptions {
    double strength = 0.0;
    double tol = 1e-6;  // relative dual-variable change
    int max_iter = 500;
};

std::vector<double> tv_denoise(const std::vector<double>& z, int width, int height,
                               const TvOptions& opt);

}  // namespace prsans::priors
