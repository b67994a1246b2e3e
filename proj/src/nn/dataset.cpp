#include "prsans/nn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "prsans/errors.hpp"
#include "prsans/rng.hpp"

namespace prsans::nn {

namespace {

void rescale01(std::vector<double>& img) {
    const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
    const double min = *lo, span = *hi - *lo;
    if (span <= 0.0) {
        std::fill(img.begin(), img.end(), 0.5);
        return;
    }
    for (double& v : img) v = (v - min) / span;
}

std::vector<double> texture_blobs(int side, Rng& rng) {
    std::vector<double> img(static_cast<std::size_t>(side) * side, 0.0);
    const int n_blobs = 3 + static_cast<int>(rng.uniform01() * 6.0);
    for (int b = 0; b < n_blobs; ++b) {
        const double cx = rng.uniform01() * side;
        const double cy = rng.uniform01() * side;
        const double s = 2.0 + rng.uniform01() * side / 4.0;
        const double amp = 0.3 + rng.uniform01();
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                const double dx = x - cx, dy = y - cy;
                img[static_cast<std::size_t>(y) * side + x] +=
                    amp * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
            }
    }
    rescale01(img);
    return img;
}

std::vector<double> texture_grating(int side, Rng& rng) {
    std::vector<double> img(static_cast<std::size_t>(side) * side);
    const double theta = rng.uniform01() * 3.14159265358979323846;
    const double freq = 0.1 + rng.uniform01() * 0.6;
    const double phase = rng.uniform01() * 6.28318530717958647692;
    const double kx = std::cos(theta) * freq, ky = std::sin(theta) * freq;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            img[static_cast<std::size_t>(y) * side + x] =
                0.5 + 0.5 * std::sin(kx * x + ky * y + phase);
    return img;
}

std::vector<double> texture_edges(int side, Rng& rng) {
    std::vector<double> img(static_cast<std::size_t>(side) * side,
                            0.2 + 0.3 * rng.uniform01());
    const int n_steps = 2 + static_cast<int>(rng.uniform01() * 3.0);
    for (int e = 0; e < n_steps; ++e) {
        const double nx = rng.normal(), ny = rng.normal();
        const double nn = std::hypot(nx, ny);
        if (nn == 0.0) continue;
        const double ox = rng.uniform01() * side, oy = rng.uniform01() * side;
        const double level = rng.uniform01();
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x)
                if ((x - ox) * nx / nn + (y - oy) * ny / nn > 0.0)
                    img[static_cast<std::size_t>(y) * side + x] =
                        0.5 * img[static_cast<std::size_t>(y) * side + x] + 0.5 * level;
    }
    rescale01(img);
    return img;
}

}  // namespace

std::vector<double> dihedral_apply(const std::vector<double>& patch, int side, int t) {
    if (t < 0 || t >= 8) throw ContractError("dihedral_apply: transform index out of range");
    if (patch.size() != static_cast<std::size_t>(side) * side)
        throw ContractError("dihedral_apply: patch size mismatch");
    std::vector<double> out(patch.size());
    const bool transpose = t & 4;
    const bool flip_x = t & 1;
    const bool flip_y = t & 2;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            int sx = x, sy = y;
            if (transpose) std::swap(sx, sy);
            if (flip_x) sx = side - 1 - sx;
            if (flip_y) sy = side - 1 - sy;
            out[static_cast<std::size_t>(y) * side + x] =
                patch[static_cast<std::size_t>(sy) * side + sx];
        }
    return out;
}

PairDataset make_texture_dataset(int n_patches, int patch, double sigma, std::uint64_t seed) {
    if (n_patches < 1) throw ContractError("make_texture_dataset: n_patches must be >= 1");
    if (patch < 4) throw ContractError("make_texture_dataset: patch too small");
    if (!(sigma >= 0.0)) throw ContractError("make_texture_dataset: sigma must be >= 0");
    PairDataset data;
    data.role = PairDataset::Role::source;
    data.patch = patch;
    data.noise_sigma = sigma;
    Rng noise(substream_seed(seed, "noise"));
    for (int i = 0; i < n_patches; ++i) {
        Rng gen(substream_seed(substream_seed(seed, "texture"), static_cast<std::uint64_t>(i)));
        std::vector<double> clean;
        switch (i % 3) {
            case 0:
                clean = texture_blobs(patch, gen);
                break;
            case 1:
                clean = texture_grating(patch, gen);
                break;
            default:
                clean = texture_edges(patch, gen);
                break;
        }
        std::vector<double> noisy = clean;
        for (double& v : noisy) v += sigma * noise.normal();
        data.clean.push_back(std::move(clean));
        data.noisy.push_back(std::move(noisy));
    }
    return data;
}

namespace {

PairDataset crop_pairs(const std::vector<std::vector<double>>& clean_images,
                       const std::vector<std::vector<double>>* noisy_images, int width, int height,
                       int n_patches, int patch, double sigma, std::uint64_t seed,
                       PairDataset::Role role, double sigma_record) {
    if (clean_images.empty()) throw ContractError("patch sampling: no images");
    if (patch > width || patch > height) throw ContractError("patch sampling: patch exceeds image");
    for (const auto& img : clean_images)
        if (img.size() != static_cast<std::size_t>(width) * height)
            throw ContractError("patch sampling: image size mismatch");
    if (noisy_images) {
        if (noisy_images->size() != clean_images.size())
            throw ContractError("patch sampling: clean/noisy image count mismatch");
        for (const auto& img : *noisy_images)
            if (img.size() != static_cast<std::size_t>(width) * height)
                throw ContractError("patch sampling: noisy image size mismatch");
    }

    PairDataset data;
    data.role = role;
    data.patch = patch;
    data.noise_sigma = sigma_record;
    Rng pick(substream_seed(seed, "grid"));
    Rng noise(substream_seed(seed, "noise"));
    for (int i = 0; i < n_patches; ++i) {
        const std::size_t im = static_cast<std::size_t>(pick.uniform01() * clean_images.size()) %
                               clean_images.size();
        const int ox = static_cast<int>(pick.uniform01() * (width - patch + 1));
        const int oy = static_cast<int>(pick.uniform01() * (height - patch + 1));
        const int t = static_cast<int>(pick.uniform01() * 8.0) % 8;

        std::vector<double> cpatch(static_cast<std::size_t>(patch) * patch);
        std::vector<double> npatch(cpatch.size());
        for (int y = 0; y < patch; ++y)
            for (int x = 0; x < patch; ++x) {
                const std::size_t src =
                    static_cast<std::size_t>(oy + y) * width + static_cast<std::size_t>(ox + x);
                cpatch[static_cast<std::size_t>(y) * patch + x] = clean_images[im][src];
                npatch[static_cast<std::size_t>(y) * patch + x] =
                    noisy_images ? (*noisy_images)[im][src] : 0.0;
            }
        cpatch = dihedral_apply(cpatch, patch, t);
        if (noisy_images) {
            npatch = dihedral_apply(npatch, patch, t);
        } else {
            npatch = cpatch;
            for (double& v : npatch) v += sigma * noise.normal();
        }
        data.clean.push_back(std::move(cpatch));
        data.noisy.push_back(std::move(npatch));
    }
    return data;
}

}  // namespace

PairDataset patches_awgn(const std::vector<std::vector<double>>& images, int width, int height,
                         int n_patches, int patch, double sigma, std::uint64_t seed,
                         PairDataset::Role role) {
    if (!(sigma >= 0.0)) throw ContractError("patches_awgn: sigma must be >= 0");
    return crop_pairs(images, nullptr, width, height, n_patches, patch, sigma, seed, role, sigma);
}

PairDataset patches_from_pairs(const std::vector<std::vector<double>>& clean_images,
                               const std::vector<std::vector<double>>& noisy_images, int width,
                               int height, int n_patches, int patch, std::uint64_t seed,
                               PairDataset::Role role, double noise_sigma_hint) {
    return crop_pairs(clean_images, &noisy_images, width, height, n_patches, patch, 0.0, seed,
                      role, noise_sigma_hint);
}

}  // namespace prsans::nn
