#pragma once

#include <cstdint>

#include "prsans/detector_image.hpp"

namespace prsans::sans {

// Acquisition noise. Poisson counting is the default: counts are drawn
// per pixel at mean time_factor * flux_scale * clean and returned divided
// by the same factor, so the expectation equals the clean image at any
// time_factor. The AWGN mode adds zero-mean Gaussian noise with variance
// awgn_sigma^2 / time_factor instead.
struct AcquireOptions {
    enum class Mode { poisson, awgn };
    Mode mode = Mode::poisson;
    double time_factor = 1.0;
    double flux_scale = 1.0;
    double awgn_sigma = 0.0;

    void validate() const;
};

// Per-pixel RNG substreams keyed by pixel index make the result
// bit-reproducible for any thread count. Masked pixels stay at 0.
DetectorImage simulate_acquisition(const DetectorImage& clean, const AcquireOptions& opt,
                                   std::uint64_t seed);

}  // namespace prsans::sans
