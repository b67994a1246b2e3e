#pragma once

#include <vector>

namespace prsans::priors {

// Separable Gaussian smoothing with symmetric boundary handling, truncated
// at radius ceil(3 sigma) and renormalized. sigma <= 0 returns the input.
std::vector<double> gaussian_blur(const std::vector<double>& z, int width, int height,
                                  double sigma);

// Normalized 1-D kernel used by the blur; exposed for direct checks.
std::vector<double> gaussian_kernel_1d(double sigma);

}  // namespace prsans::priors

namespace prsans::ref {

// Plain serial version, kept as the comparison baseline for the parallel
// kernel above.
std::vector<double> gaussian_blur_serial(const std::vector<double>& z, int width, int height,
                                         double sigma);

}  // namespace prsans::ref
