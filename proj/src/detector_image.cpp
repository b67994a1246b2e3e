#include "prsans/detector_image.hpp"

#include <cmath>

#include "prsans/errors.hpp"

namespace prsans {

std::size_t DetectorImage::valid_count() const {
    if (mask.empty()) return size();
    std::size_t n = 0;
    for (std::uint8_t m : mask) n += (m != 0);
    return n;
}

void DetectorImage::validate() const {
    if (width < 1 || height < 1) throw ContractError("DetectorImage: width, height must be >= 1");
    if (data.size() != size()) throw ContractError("DetectorImage: data length != width*height");
    if (!mask.empty() && mask.size() != size())
        throw ContractError("DetectorImage: mask length != width*height");
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (valid_at(i) && !std::isfinite(data[i]))
            throw ContractError("DetectorImage: non-finite intensity");
    }
    if (acq_time && !(*acq_time > 0.0)) throw ContractError("DetectorImage: acq_time must be > 0");
}

std::vector<double> DetectorImage::as_vector() const {
    return std::vector<double>(data.begin(), data.end());
}

void DetectorImage::set_from_vector(const std::vector<double>& v) {
    if (v.size() != size()) throw ContractError("set_from_vector: size mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) data[i] = static_cast<float>(v[i]);
}

DetectorImage make_image(int width, int height, float fill) {
    DetectorImage img;
    img.width = width;
    img.height = height;
    img.data.assign(static_cast<std::size_t>(width) * height, fill);
    img.beam_cx = width / 2.0;
    img.beam_cy = height / 2.0;
    return img;
}

void normalize_inplace(DetectorImage& img) {
    float mx = 0.0f;
    for (std::size_t i = 0; i < img.data.size(); ++i)
        if (img.valid_at(i) && img.data[i] > mx) mx = img.data[i];
    const double scale = mx > 0.0f ? static_cast<double>(mx) : 1.0;
    for (float& v : img.data) v = static_cast<float>(v / scale);
    img.norm_scale = scale;
    img.norm_offset = 0.0;
}

void denormalize_inplace(DetectorImage& img) {
    if (!img.norm_scale) return;
    const double scale = *img.norm_scale;
    const double offset = img.norm_offset.value_or(0.0);
    for (float& v : img.data) v = static_cast<float>(v * scale + offset);
    img.norm_scale.reset();
    img.norm_offset.reset();
}

}  // namespace prsans
