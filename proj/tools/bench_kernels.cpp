// Timing harness for the OpenMP kernels against their serial reference
// implementations. Each pair is checked for agreement before timing, so a
// reported speedup always refers to two implementations producing the same
// output. Reported time is the best of --reps runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "prsans/nn/net.hpp"
#include "prsans/priors/blur.hpp"
#include "prsans/rng.hpp"

namespace {

double best_seconds(const std::function<void()>& fn, int reps) {
    fn();  // warm up caches and the OpenMP thread pool
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::vector<double> random_image(int side, std::uint64_t seed) {
    prsans::Rng rng(seed);
    std::vector<double> z(static_cast<std::size_t>(side) * side);
    for (double& v : z) v = rng.uniform01();
    return z;
}

}  // namespace

int main(int argc, char** argv) {
    int reps = 5;
    int conv_side = 128;
    int blur_side = 512;
    double blur_sigma = 2.5;

    CLI::App app{"serial-reference vs OpenMP kernel timings"};
    app.add_option("--reps", reps, "timed repetitions per kernel (best is reported)")
        ->check(CLI::PositiveNumber);
    app.add_option("--conv-side", conv_side, "image side for the conv stack")
        ->check(CLI::PositiveNumber);
    app.add_option("--blur-side", blur_side, "image side for the Gaussian blur")
        ->check(CLI::PositiveNumber);
    app.add_option("--blur-sigma", blur_sigma, "blur width in pixels")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("threads: %d, reps: %d\n", threads, reps);
    std::printf("%-22s %8s %12s %12s %9s %11s\n", "kernel", "side", "serial_ms", "parallel_ms",
                "speedup", "max|diff|");

    int bad = 0;
    auto row = [&](const char* name, int side, const std::vector<double>& serial_out,
                   const std::vector<double>& parallel_out, const std::function<void()>& serial_fn,
                   const std::function<void()>& parallel_fn) {
        const double diff = max_abs_diff(serial_out, parallel_out);
        if (!(diff < 1e-10)) ++bad;
        const double ts = best_seconds(serial_fn, reps);
        const double tp = best_seconds(parallel_fn, reps);
        std::printf("%-22s %8d %12.3f %12.3f %9.2f %11.2e\n", name, side, ts * 1e3, tp * 1e3,
                    ts / tp, diff);
    };

    {
        prsans::nn::NetArch arch;  // depth 5, 16 channels, 3x3
        auto net = prsans::nn::ResidualDenoiser::he_init(arch, 71);
        const auto z = random_image(conv_side, 72);
        auto serial_out = prsans::ref::residual_forward_serial(net, z, conv_side, conv_side);
        auto parallel_out = net.residual(z, conv_side, conv_side);
        row("conv_residual_stack", conv_side, serial_out, parallel_out,
            [&] { prsans::ref::residual_forward_serial(net, z, conv_side, conv_side); },
            [&] { net.residual(z, conv_side, conv_side); });
    }
    {
        const auto z = random_image(blur_side, 73);
        auto serial_out = prsans::ref::gaussian_blur_serial(z, blur_side, blur_side, blur_sigma);
        auto parallel_out = prsans::priors::gaussian_blur(z, blur_side, blur_side, blur_sigma);
        row("gaussian_blur", blur_side, serial_out, parallel_out,
            [&] { prsans::ref::gaussian_blur_serial(z, blur_side, blur_side, blur_sigma); },
            [&] { prsans::priors::gaussian_blur(z, blur_side, blur_side, blur_sigma); });
    }

    if (bad > 0) {
        std::fprintf(stderr, "error: %d kernel pair(s) disagree beyond 1e-10\n", bad);
        return 1;
    }
    return 0;
}
