#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace prsans {

// 2D detector frame: row-major intensities with beam center, validity mask
// and acquisition metadata. Payload is f32 so file round-trips are
// bit-exact; numerics upstream run in double.
struct DetectorImage {
    int width = 0;
    int height = 0;
    std::vector<float> data;          // row-major, size width*height
    double beam_cx = 0.0;             // fractional pixel coordinates
    double beam_cy = 0.0;
    std::vector<std::uint8_t> mask;   // empty = all valid; else 1 = valid
    std::optional<double> acq_time;   // seconds
    // Linear rescale applied on ingestion (raw = scale * value + offset).
    std::optional<double> norm_scale;
    std::optional<double> norm_offset;

    std::size_t size() const { return static_cast<std::size_t>(width) * height; }
    bool valid_at(std::size_t i) const { return mask.empty() || mask[i] != 0; }
    std::size_t valid_count() const;

    float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    // Throws ContractError if any invariant fails.
    void validate() const;

    std::vector<double> as_vector() const;
    void set_from_vector(const std::vector<double>& v);
};

DetectorImage make_image(int width, int height, float fill = 0.0f);

// Rescale valid pixels to [0, 1] (offset = 0, scale = max valid pixel) and
// record the scale for inversion. No-op for an all-zero image.
void normalize_inplace(DetectorImage& img);
void denormalize_inplace(DetectorImage& img);

}  // namespace prsans
