#pragma once

#include <string>
#include <vector>

namespace prsans::sans {

// Flat detector normal to the beam. Pixel (ix, iy) is sampled at its
// center (ix + 0.5, iy + 0.5) in pixel units; the beam center is
// fractional pixels. Wavelength in angstroms, distances in meters, so Q
// comes out in inverse angstroms.
struct ScatteringGeometry {
    double wavelength = 6.0;
    double sample_detector_distance = 15.5;
    double pixel_pitch = 5.5e-3;
    int width = 256;
    int height = 256;
    double beam_cx = 128.0;
    double beam_cy = 128.0;

    void validate() const;
    std::string to_json() const;
    static ScatteringGeometry from_json(const std::string& text);
};

// Q at one pixel: r = pitch * |pixel center - beam center|,
// theta = atan(r / d) / 2, Q = (4 pi / lambda) sin(theta).
double q_at(const ScatteringGeometry& g, int ix, int iy);

// Per-pixel Q image, row-major.
std::vector<double> q_map(const ScatteringGeometry& g);

}  // namespace prsans::sans
