#include "prsans/nn/net.hpp"

#include <cmath>
#include <cstddef>

#include "prsans/errors.hpp"
#include "prsans/rng.hpp"

namespace prsans::nn {

namespace {

std::vector<ConvLayer> make_layers(const NetArch& arch) {
    if (arch.depth < 1) throw ContractError("NetArch: depth must be >= 1");
    if (arch.channels < 1) throw ContractError("NetArch: channels must be >= 1");
    if (arch.kernel_size < 1 || arch.kernel_size % 2 == 0)
        throw ContractError("NetArch: kernel_size must be odd and >= 1");
    std::vector<ConvLayer> layers(static_cast<std::size_t>(arch.depth));
    for (int l = 0; l < arch.depth; ++l) {
        ConvLayer& layer = layers[static_cast<std::size_t>(l)];
        layer.in_ch = (l == 0) ? 1 : arch.channels;
        layer.out_ch = (l == arch.depth - 1) ? 1 : arch.channels;
        layer.ksize = arch.kernel_size;
        layer.w.assign(static_cast<std::size_t>(layer.in_ch) * layer.out_ch * layer.ksize *
                           layer.ksize,
                       0.0);
        layer.b.assign(static_cast<std::size_t>(layer.out_ch), 0.0);
    }
    return layers;
}

}  // namespace

int fold_index(int i, int n, PaddingMode mode) {
    if (mode == PaddingMode::periodic) {
        int m = i % n;
        if (m < 0) m += n;
        return m;
    }
    if (n == 1) return 0;
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

ResidualDenoiser ResidualDenoiser::zeros(NetArch arch) {
    ResidualDenoiser net;
    net.arch = arch;
    net.layers = make_layers(arch);
    return net;
}

ResidualDenoiser ResidualDenoiser::he_init(NetArch arch, std::uint64_t seed) {
    ResidualDenoiser net = zeros(arch);
    net.init_seed = seed;
    Rng rng(substream_seed(seed, "init"));
    for (auto& layer : net.layers) {
        const double fan_in = static_cast<double>(layer.in_ch) * layer.ksize * layer.ksize;
        const double scale = std::sqrt(2.0 / fan_in);
        for (auto& wv : layer.w) wv = scale * rng.normal();
    }
    return net;
}

void ResidualDenoiser::validate() const {
    if (layers.empty()) throw ContractError("ResidualDenoiser: no layers");
    if (layers.front().in_ch != 1) throw ContractError("ResidualDenoiser: input must be 1 channel");
    if (layers.back().out_ch != 1)
        throw ContractError("ResidualDenoiser: output must be 1 channel");
    for (std::size_t l = 0; l + 1 < layers.size(); ++l)
        if (layers[l].out_ch != layers[l + 1].in_ch)
            throw ContractError("ResidualDenoiser: channel mismatch between layers");
    for (const auto& layer : layers) {
        for (double v : layer.w)
            if (!std::isfinite(v)) throw ContractError("ResidualDenoiser: non-finite weight");
        for (double v : layer.b)
            if (!std::isfinite(v)) throw ContractError("ResidualDenoiser: non-finite bias");
    }
}

std::size_t ResidualDenoiser::param_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.w.size() + layer.b.size();
    return n;
}

void conv_forward(const ConvLayer& layer, PaddingMode mode, const std::vector<double>& in,
                  int width, int height, std::vector<double>& out) {
    const int R = layer.ksize / 2;
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    out.assign(static_cast<std::size_t>(layer.out_ch) * plane, 0.0);
#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_ch; ++o) {
        double* op = out.data() + static_cast<std::size_t>(o) * plane;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double acc = layer.b[static_cast<std::size_t>(o)];
                for (int i = 0; i < layer.in_ch; ++i) {
                    const double* ip = in.data() + static_cast<std::size_t>(i) * plane;
                    for (int u = -R; u <= R; ++u) {
                        const int yy = fold_index(y + u, height, mode);
                        for (int v = -R; v <= R; ++v) {
                            const int xx = fold_index(x + v, width, mode);
                            acc += layer.at(o, i, u + R, v + R) *
                                   ip[static_cast<std::size_t>(yy) * width + xx];
                        }
                    }
                }
                op[static_cast<std::size_t>(y) * width + x] = acc;
            }
    }
}

std::vector<double> ResidualDenoiser::residual(const std::vector<double>& z, int width,
                                               int height) const {
    validate();
    if (width < 1 || height < 1) throw ContractError("ResidualDenoiser: bad shape");
    if (z.size() != static_cast<std::size_t>(width) * height)
        throw ContractError("ResidualDenoiser: data length does not match shape");
    std::vector<double> cur = z, next;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        conv_forward(layers[l], arch.padding, cur, width, height, next);
        if (l + 1 < layers.size())
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        cur.swap(next);
    }
    return cur;
}

std::vector<double> ResidualDenoiser::denoise(const std::vector<double>& z, int width,
                                              int height) const {
    auto r = residual(z, width, height);
    for (std::size_t j = 0; j < z.size(); ++j) r[j] = z[j] - r[j];
    return r;
}

std::vector<double> ResidualDenoiser::flat_params() const {
    std::vector<double> p;
    p.reserve(param_count());
    for (const auto& layer : layers) {
        p.insert(p.end(), layer.w.begin(), layer.w.end());
        p.insert(p.end(), layer.b.begin(), layer.b.end());
    }
    return p;
}

void ResidualDenoiser::set_flat_params(const std::vector<double>& p) {
    if (p.size() != param_count()) throw ContractError("set_flat_params: length mismatch");
    std::size_t pos = 0;
    for (auto& layer : layers) {
        for (auto& v : layer.w) v = p[pos++];
        for (auto& v : layer.b) v = p[pos++];
    }
}

std::string provenance_name(Provenance p, int adapted_pairs) {
    switch (p) {
        case Provenance::zero_start:
            return "zero_start";
        case Provenance::pretrained:
            return "pretrained";
        case Provenance::adapted:
            return "adapted(" + std::to_string(adapted_pairs) + ")";
    }
    throw ContractError("provenance_name: bad value");
}

}  // namespace prsans::nn

namespace prsans::ref {

std::vector<double> residual_forward_serial(const nn::ResidualDenoiser& net,
                                            const std::vector<double>& z, int width, int height) {
    using nn::fold_index;
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    std::vector<double> cur = z, next;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        const int R = layer.ksize / 2;
        next.assign(static_cast<std::size_t>(layer.out_ch) * plane, 0.0);
        for (int o = 0; o < layer.out_ch; ++o)
            for (int i = 0; i < layer.in_ch; ++i)
                for (int y = 0; y < height; ++y)
                    for (int x = 0; x < width; ++x)
                        for (int u = -R; u <= R; ++u)
                            for (int v = -R; v <= R; ++v)
                                next[static_cast<std::size_t>(o) * plane +
                                     static_cast<std::size_t>(y) * width + x] +=
                                    layer.at(o, i, u + R, v + R) *
                                    cur[static_cast<std::size_t>(i) * plane +
                                        static_cast<std::size_t>(
                                            fold_index(y + u, height, net.arch.padding)) *
                                            width +
                                        fold_index(x + v, width, net.arch.padding)];
        for (int o = 0; o < layer.out_ch; ++o)
            for (std::size_t j = 0; j < plane; ++j)
                next[static_cast<std::size_t>(o) * plane + j] += layer.b[static_cast<std::size_t>(o)];
        if (l + 1 < net.layers.size())
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        cur.swap(next);
    }
    return cur;
}

}  // namespace prsans::ref
