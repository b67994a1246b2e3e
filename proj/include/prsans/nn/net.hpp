#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prsans::nn {

enum class PaddingMode { symmetric, periodic };

enum class Provenance { zero_start, pretrained, adapted };

struct NetArch {
    int depth = 5;        // number of conv layers
    int channels = 16;    // hidden width; input and output are 1 channel
    int kernel_size = 3;  // odd
    PaddingMode padding = PaddingMode::symmetric;
};

// Dense conv weights, [out][in][ku][kv] row-major, bias per out channel.
// Parameters are kept in double for training; checkpoints store f32.
struct ConvLayer {
    int in_ch = 0;
    int out_ch = 0;
    int ksize = 0;
    std::vector<double> w;
    std::vector<double> b;

    std::size_t weight_count() const { return w.size(); }
    double& at(int o, int i, int u, int v) {
        return w[((static_cast<std::size_t>(o) * in_ch + i) * ksize + u) * ksize + v];
    }
    double at(int o, int i, int u, int v) const {
        return w[((static_cast<std::size_t>(o) * in_ch + i) * ksize + u) * ksize + v];
    }
};

// Residual denoiser: denoise(z) = z - net(z). Interior layers are
// conv+ReLU, the final layer is linear, so zero parameters give the exact
// identity map.
struct ResidualDenoiser {
    NetArch arch;
    std::vector<ConvLayer> layers;
    double sigma_train = 5.0 / 255.0;
    Provenance provenance = Provenance::zero_start;
    int adapted_pairs = 0;  // K when provenance = adapted
    std::uint64_t init_seed = 0;

    static ResidualDenoiser zeros(NetArch arch);
    // He-scaled seeded Gaussian init, biases zero.
    static ResidualDenoiser he_init(NetArch arch, std::uint64_t seed);

    void validate() const;
    std::size_t param_count() const;

    // Residual prediction net(z) for a single-channel image.
    std::vector<double> residual(const std::vector<double>& z, int width, int height) const;
    std::vector<double> denoise(const std::vector<double>& z, int width, int height) const;

    // Flat parameter vector in declared layer order, weights then bias per
    // layer; used by finite-difference checks and the checkpoint payload.
    std::vector<double> flat_params() const;
    void set_flat_params(const std::vector<double>& p);
};

std::string provenance_name(Provenance p, int adapted_pairs);

// index fold into [0, n) for the padding modes; exposed for the backward
// pass and the serial reference.
int fold_index(int i, int n, PaddingMode mode);

// Single conv layer forward on multi-channel input, gather form.
void conv_forward(const ConvLayer& layer, PaddingMode mode, const std::vector<double>& in,
                  int width, int height, std::vector<double>& out);

}  // namespace prsans::nn

namespace prsans::ref {

// Explicit 6-nested-loop convolution stack, serial, used as the
// correctness oracle and the benchmark baseline for the parallel kernels.
std::vector<double> residual_forward_serial(const nn::ResidualDenoiser& net,
                                            const std::vector<double>& z, int width, int height);

}  // namespace prsans::ref
