#include "prsans/priors/tv.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

#include "prsans/errors.hpp"
#include "prsans/parallel.hpp"

namespace prsans::priors {

namespace {

// (G^T p)(i,j). px pairs x[i][j] with x[i][j+1], py pairs x[i][j] with
// x[i+1][j]; entries on the far edge stay zero, which encodes the
// replicated boundary of the forward-difference gradient.
inline double adjoint_at(const std::vector<double>& px, const std::vector<double>& py, int w, int h,
                         int i, int j) {
    const std::size_t idx = static_cast<std::size_t>(i) * w + j;
    double v = 0.0;
    if (j < w - 1) v -= px[idx];
    if (j > 0) v += px[idx - 1];
    if (i < h - 1) v -= py[idx];
    if (i > 0) v += py[idx - static_cast<std::size_t>(w)];
    return v;
}

}  // namespace

std::vector<double> tv_denoise(const std::vector<double>& z, int width, int height,
                               const TvOptions& opt) {
    if (width < 1 || height < 1) throw ContractError("tv_denoise: bad shape");
    if (z.size() != static_cast<std::size_t>(width) * height)
        throw ContractError("tv_denoise: data length does not match shape");
    if (!(opt.strength >= 0.0)) throw ContractError("tv_denoise: strength must be >= 0");
    if (opt.max_iter < 1) throw ContractError("tv_denoise: max_iter must be >= 1");
    if (opt.strength == 0.0) return z;

    const int w = width, h = height;
    const std::size_t n = z.size();
    const double lam = opt.strength;
    const double step = 1.0 / 8.0;  // 1 / ||G||^2 upper bound

    std::vector<double> px(n, 0.0), py(n, 0.0);
    std::vector<double> npx(n, 0.0), npy(n, 0.0);
    std::vector<double> q(n, 0.0);

    for (int it = 0; it < opt.max_iter; ++it) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * w + j;
                q[idx] = adjoint_at(px, py, w, h, i, j) - z[idx] / lam;
            }

#pragma omp parallel for schedule(static)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const std::size_t idx = static_cast<std::size_t>(i) * w + j;
                npx[idx] = (j < w - 1)
                               ? std::clamp(px[idx] - step * (q[idx + 1] - q[idx]), -1.0, 1.0)
                               : 0.0;
                npy[idx] =
                    (i < h - 1)
                        ? std::clamp(
                              py[idx] - step * (q[idx + static_cast<std::size_t>(w)] - q[idx]),
                              -1.0, 1.0)
                        : 0.0;
            }

        const double delta_sq = deterministic_sum(n, [&](std::size_t k) {
            const double dx = npx[k] - px[k];
            const double dy = npy[k] - py[k];
            return dx * dx + dy * dy;
        });
        const double prev_sq =
            deterministic_sum(n, [&](std::size_t k) { return px[k] * px[k] + py[k] * py[k]; });

        px.swap(npx);
        py.swap(npy);

        if (std::sqrt(delta_sq) <= opt.tol * std::max(1.0, std::sqrt(prev_sq))) break;
    }

    std::vector<double> out(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * w + j;
            out[idx] = z[idx] - lam * adjoint_at(px, py, w, h, i, j);
        }
    return out;
}

}  // namespace prsans::priors
