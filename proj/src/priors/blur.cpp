#include "prsans/priors/blur.hpp"

#include <cmath>
#include <cstddef>

#include "prsans/errors.hpp"

namespace prsans::priors {

namespace {

// Symmetric (mirror without repeating the edge sample twice beyond bounds)
// index fold: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

void check_shape(const std::vector<double>& z, int width, int height) {
    if (width < 1 || height < 1) throw ContractError("gaussian_blur: bad shape");
    if (z.size() != static_cast<std::size_t>(width) * height)
        throw ContractError("gaussian_blur: data length does not match shape");
}

}  // namespace

std::vector<double> gaussian_kernel_1d(double sigma) {
    if (!(sigma > 0.0)) throw ContractError("gaussian_kernel_1d: sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-0.5 * (t * t) / (sigma * sigma));
        k[static_cast<std::size_t>(t + radius)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

std::vector<double> gaussian_blur(const std::vector<double>& z, int width, int height,
                                  double sigma) {
    check_shape(z, width, height);
    if (sigma <= 0.0) return z;
    const auto k = gaussian_kernel_1d(sigma);
    const int radius = (static_cast<int>(k.size()) - 1) / 2;

    std::vector<double> tmp(z.size()), out(z.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       z[static_cast<std::size_t>(i) * width + reflect_index(j + t, width)];
            tmp[static_cast<std::size_t>(i) * width + j] = acc;
        }
#pragma omp parallel for schedule(static)
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       tmp[static_cast<std::size_t>(reflect_index(i + t, height)) * width + j];
            out[static_cast<std::size_t>(i) * width + j] = acc;
        }
    return out;
}

}  // namespace prsans::priors

namespace prsans::ref {

std::vector<double> gaussian_blur_serial(const std::vector<double>& z, int width, int height,
                                         double sigma) {
    if (sigma <= 0.0) return z;
    const auto k = prsans::priors::gaussian_kernel_1d(sigma);
    const int radius = (static_cast<int>(k.size()) - 1) / 2;
    auto reflect = [](int i, int n) {
        if (n == 1) return 0;
        const int period = 2 * n;
        int m = i % period;
        if (m < 0) m += period;
        return m < n ? m : period - 1 - m;
    };
    std::vector<double> tmp(z.size()), out(z.size());
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       z[static_cast<std::size_t>(i) * width + reflect(j + t, width)];
            tmp[static_cast<std::size_t>(i) * width + j] = acc;
        }
    for (int i = 0; i < height; ++i)
        for (int j = 0; j < width; ++j) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += k[static_cast<std::size_t>(t + radius)] *
                       tmp[static_cast<std::size_t>(reflect(i + t, height)) * width + j];
            out[static_cast<std::size_t>(i) * width + j] = acc;
        }
    return out;
}

}  // namespace prsans::ref
