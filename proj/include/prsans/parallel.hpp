#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace prsans {

// Block size for deterministic reductions. Fixed boundaries make the
// floating-point result independent of the thread count.
inline constexpr std::size_t kReduceBlock = 2048;

// Sum of f(i) over [0, n). Blocks are summed left to right inside and the
// per-block partials are combined left to right, so any OMP schedule gives
// the same bits.
template <class F>
double deterministic_sum(std::size_t n, F&& f) {
    if (n == 0) return 0.0;
    const std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
    if (nb == 1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += f(i);
        return s;
    }
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const std::size_t hi = std::min(n, lo + kReduceBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

// Per-bin sums with deterministic combination order. bin(i) < n_bins or < 0
// to skip; value(i) is accumulated, counts track contributors.
template <class BinF, class ValF>
void deterministic_binned_sum(std::size_t n, std::size_t n_bins, BinF&& bin, ValF&& value,
                              std::vector<double>& sums, std::vector<long long>& counts) {
    sums.assign(n_bins, 0.0);
    counts.assign(n_bins, 0);
    const std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<std::vector<double>> psum(nb);
    std::vector<std::vector<long long>> pcnt(nb);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nb); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const std::size_t hi = std::min(n, lo + kReduceBlock);
        std::vector<double> s(n_bins, 0.0);
        std::vector<long long> c(n_bins, 0);
        for (std::size_t i = lo; i < hi; ++i) {
            const long long k = bin(i);
            if (k < 0 || k >= static_cast<long long>(n_bins)) continue;
            s[static_cast<std::size_t>(k)] += value(i);
            ++c[static_cast<std::size_t>(k)];
        }
        psum[static_cast<std::size_t>(b)] = std::move(s);
        pcnt[static_cast<std::size_t>(b)] = std::move(c);
    }
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t k = 0; k < n_bins; ++k) {
            sums[k] += psum[b][k];
            counts[k] += pcnt[b][k];
        }
    }
}

}  // namespace prsans
