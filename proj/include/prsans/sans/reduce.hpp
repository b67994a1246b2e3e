#pragma once

#include <string>
#include <vector>

#include "prsans/detector_image.hpp"
#include "prsans/sans/geometry.hpp"

namespace prsans::sans {

// Azimuthally averaged 1-D curve. Bins with no contributing pixels keep
// pixel_count 0 and a NaN intensity; they are flagged, never interpolated.
struct IQCurve {
    std::vector<double> q_bins;  // bin centers, strictly increasing
    std::vector<double> intensity;
    std::vector<long long> pixel_count;

    std::size_t size() const { return q_bins.size(); }
    bool empty_bin(std::size_t i) const { return pixel_count[i] == 0; }
    std::string to_csv() const;  // q,intensity,pixel_count; empty intensity for empty bins
};

enum class Binning { linear, log };

// Mean intensity of the valid pixels falling in each Q bin. Bin edges span
// the valid-pixel Q range; log binning excludes Q = 0 pixels (linear
// routes them to the lowest bin). Per-bin sums use a fixed-block ordered
// reduction, so results are identical for any thread count.
IQCurve azimuthal_average(const DetectorImage& img, const ScatteringGeometry& g, int n_bins,
                          Binning binning);

}  // namespace prsans::sans
