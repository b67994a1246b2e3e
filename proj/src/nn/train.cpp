#include "prsans/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>

#include "prsans/errors.hpp"
#include "prsans/rng.hpp"

namespace prsans::nn {

namespace {

// Patch side length of a square sample.
int side_of(const PairDataset& data) { return data.patch; }

// dW/db accumulation for one layer; threads own disjoint out-channel
// slices, inner sums run serially, so results do not depend on the thread
// count.
void conv_backward_params(const ConvLayer& layer, PaddingMode mode,
                          const std::vector<double>& act_in, const std::vector<double>& dpre,
                          int width, int height, ConvLayer& grad) {
    const int R = layer.ksize / 2;
    const std::size_t plane = static_cast<std::size_t>(width) * height;
#pragma omp parallel for schedule(static)
    for (int o = 0; o < layer.out_ch; ++o) {
        const double* dp = dpre.data() + static_cast<std::size_t>(o) * plane;
        double bacc = 0.0;
        for (std::size_t j = 0; j < plane; ++j) bacc += dp[j];
        grad.b[static_cast<std::size_t>(o)] += bacc;
        for (int i = 0; i < layer.in_ch; ++i) {
            const double* ap = act_in.data() + static_cast<std::size_t>(i) * plane;
            for (int u = -R; u <= R; ++u)
                for (int v = -R; v <= R; ++v) {
                    double acc = 0.0;
                    for (int y = 0; y < height; ++y) {
                        const int yy = fold_index(y + u, height, mode);
                        for (int x = 0; x < width; ++x)
                            acc += dp[static_cast<std::size_t>(y) * width + x] *
                                   ap[static_cast<std::size_t>(yy) * width +
                                      fold_index(x + v, width, mode)];
                    }
                    grad.at(o, i, u + R, v + R) += acc;
                }
        }
    }
}

// Exact adjoint of conv-with-padding: scatter into the folded input
// position. Threads own disjoint input channels.
void conv_backward_input(const ConvLayer& layer, PaddingMode mode, const std::vector<double>& dpre,
                         int width, int height, std::vector<double>& dact_in) {
    const int R = layer.ksize / 2;
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    dact_in.assign(static_cast<std::size_t>(layer.in_ch) * plane, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < layer.in_ch; ++i) {
        double* da = dact_in.data() + static_cast<std::size_t>(i) * plane;
        for (int o = 0; o < layer.out_ch; ++o) {
            const double* dp = dpre.data() + static_cast<std::size_t>(o) * plane;
            for (int u = -R; u <= R; ++u)
                for (int v = -R; v <= R; ++v) {
                    const double wv = layer.at(o, i, u + R, v + R);
                    if (wv == 0.0) continue;
                    for (int y = 0; y < height; ++y) {
                        const std::size_t row =
                            static_cast<std::size_t>(fold_index(y + u, height, mode)) * width;
                        for (int x = 0; x < width; ++x)
                            da[row + fold_index(x + v, width, mode)] +=
                                wv * dp[static_cast<std::size_t>(y) * width + x];
                    }
                }
        }
    }
}

// Forward keeping post-activation planes, then reverse accumulation.
// Returns the sample loss; grads accumulate += (unscaled).
double backprop_sample(const ResidualDenoiser& net, const std::vector<double>& noisy,
                       const std::vector<double>& clean, int side, GradBuffer& grads) {
    const int w = side, h = side;
    const std::size_t n_pix = static_cast<std::size_t>(w) * h;
    const std::size_t depth = net.layers.size();

    std::vector<std::vector<double>> acts(depth + 1);
    acts[0] = noisy;
    for (std::size_t l = 0; l < depth; ++l) {
        conv_forward(net.layers[l], net.arch.padding, acts[l], w, h, acts[l + 1]);
        if (l + 1 < depth)
            for (double& v : acts[l + 1]) v = v > 0.0 ? v : 0.0;
    }

    // denoised = noisy - residual; diff drives both loss and dL/dresidual.
    const std::vector<double>& resid = acts[depth];
    std::vector<double> dcur(n_pix);
    double loss = 0.0;
    for (std::size_t j = 0; j < n_pix; ++j) {
        const double diff = (noisy[j] - resid[j]) - clean[j];
        loss += diff * diff;
        dcur[j] = -2.0 * diff / static_cast<double>(n_pix);
    }
    loss /= static_cast<double>(n_pix);

    std::vector<double> dprev;
    for (std::size_t l = depth; l-- > 0;) {
        // dcur holds dL/d(post-activation of layer l); mask it back through
        // the ReLU except for the final linear layer.
        if (l + 1 < depth) {
            const auto& post = acts[l + 1];
            for (std::size_t j = 0; j < dcur.size(); ++j)
                if (post[j] <= 0.0) dcur[j] = 0.0;
        }
        conv_backward_params(net.layers[l], net.arch.padding, acts[l], dcur, w, h, grads[l]);
        if (l > 0) {
            conv_backward_input(net.layers[l], net.arch.padding, dcur, w, h, dprev);
            dcur.swap(dprev);
        }
    }
    return loss;
}

void scale_grads(GradBuffer& grads, double s) {
    for (auto& layer : grads) {
        for (auto& v : layer.w) v *= s;
        for (auto& v : layer.b) v *= s;
    }
}

void add_grads(GradBuffer& into, const GradBuffer& from) {
    for (std::size_t l = 0; l < into.size(); ++l) {
        for (std::size_t j = 0; j < into[l].w.size(); ++j) into[l].w[j] += from[l].w[j];
        for (std::size_t j = 0; j < into[l].b.size(); ++j) into[l].b[j] += from[l].b[j];
    }
}

ResidualDenoiser run_sgd(ResidualDenoiser net, const PairDataset& data, const TrainConfig& cfg,
                         TrainCurve* curve) {
    data.validate();
    if (cfg.epochs < 0) throw ContractError("TrainConfig: epochs must be >= 0");
    if (cfg.batch < 1) throw ContractError("TrainConfig: batch must be >= 1");
    if (!(cfg.lr > 0.0)) throw ContractError("TrainConfig: lr must be positive");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw ContractError("TrainConfig: momentum must be in [0, 1)");
    if (cfg.shards < 1) throw ContractError("TrainConfig: shards must be >= 1");

    const std::size_t n = data.size();
    const std::size_t n_val =
        std::min(n - 1, static_cast<std::size_t>(std::ceil(cfg.val_fraction *n)));
    std::vector<std::size_t> train_idx(n - n_val), val_idx(n_val);
    std::iota(train_idx.begin(), train_idx.end(), 0);
    std::iota(val_idx.begin(), val_idx.end(), n - n_val);

    GradBuffer velocity = zero_grads(net);
    ResidualDenoiser best = net;
    double best_score = dataset_loss(net, data, n_val ? val_idx : train_idx);
    int best_epoch = -1;

    Rng shuffle_rng(substream_seed(cfg.seed, "shuffle"));
    const int decay_epoch = static_cast<int>(std::floor(0.8 * cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = (cfg.epochs > 0 && epoch >= decay_epoch) ? cfg.lr / 10.0 : cfg.lr;
        // Fisher-Yates with the seeded stream; identical seeds give
        // identical batch sequences.
        for (std::size_t i = train_idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform01() * i);
            std::swap(train_idx[i - 1], train_idx[std::min(j, i - 1)]);
        }

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_idx.size();
             start += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end =
                std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch));
            std::vector<std::size_t> batch(train_idx.begin() + start, train_idx.begin() + end);
            GradBuffer grads = zero_grads(net);
            epoch_loss += loss_and_grad(net, data, batch, &grads, cfg.shards);
            ++batches;
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                auto& layer = net.layers[l];
                for (std::size_t j = 0; j < layer.w.size(); ++j) {
                    velocity[l].w[j] = cfg.momentum * velocity[l].w[j] - lr * grads[l].w[j];
                    layer.w[j] += velocity[l].w[j];
                }
                for (std::size_t j = 0; j < layer.b.size(); ++j) {
                    velocity[l].b[j] = cfg.momentum * velocity[l].b[j] - lr * grads[l].b[j];
                    layer.b[j] += velocity[l].b[j];
                }
            }
        }
        epoch_loss /= static_cast<double>(std::max<std::size_t>(1, batches));

        const double score = dataset_loss(net, data, n_val ? val_idx : train_idx);
        if (curve) {
            curve->train_loss.push_back(epoch_loss);
            if (n_val) curve->val_loss.push_back(score);
        }
        if (score < best_score) {
            best_score = score;
            best = net;
            best_epoch = epoch;
        }
    }
    if (curve) curve->best_epoch = best_epoch;
    // best_epoch -1 means no epoch beat the starting point; return the
    // start in that case too, it is the lowest-scoring snapshot seen.
    return best;
}

}  // namespace

void PairDataset::validate() const {
    if (clean.empty()) throw ContractError("PairDataset: empty dataset");
    if (clean.size() != noisy.size()) throw ContractError("PairDataset: clean/noisy size mismatch");
    const std::size_t expect = static_cast<std::size_t>(patch) * patch;
    for (std::size_t i = 0; i < clean.size(); ++i)
        if (clean[i].size() != expect || noisy[i].size() != expect)
            throw ContractError("PairDataset: patch size mismatch");
}

GradBuffer zero_grads(const ResidualDenoiser& net) {
    GradBuffer grads = net.layers;
    for (auto& layer : grads) {
        std::fill(layer.w.begin(), layer.w.end(), 0.0);
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
    return grads;
}

double loss_and_grad(const ResidualDenoiser& net, const PairDataset& data,
                     const std::vector<std::size_t>& batch, GradBuffer* grads, int shards) {
    net.validate();
    if (batch.empty()) throw ContractError("loss_and_grad: empty batch");
    if (shards < 1) throw ContractError("loss_and_grad: shards must be >= 1");
    const int side = side_of(data);

    GradBuffer local = zero_grads(net);
    double loss_sum = 0.0;
    if (shards == 1) {
        for (std::size_t s : batch)
            loss_sum += backprop_sample(net, data.noisy[s], data.clean[s], side, local);
    } else {
        // Disjoint contiguous shards evaluated independently, then summed
        // in shard order.
        const std::size_t per =
            (batch.size() + static_cast<std::size_t>(shards) - 1) / static_cast<std::size_t>(shards);
        std::vector<GradBuffer> shard_grads;
        std::vector<double> shard_loss;
        for (std::size_t start = 0; start < batch.size(); start += per) {
            const std::size_t end = std::min(batch.size(), start + per);
            GradBuffer g = zero_grads(net);
            double ls = 0.0;
            for (std::size_t i = start; i < end; ++i)
                ls += backprop_sample(net, data.noisy[batch[i]], data.clean[batch[i]], side, g);
            shard_grads.push_back(std::move(g));
            shard_loss.push_back(ls);
        }
        for (std::size_t s = 0; s < shard_grads.size(); ++s) {
            add_grads(local, shard_grads[s]);
            loss_sum += shard_loss[s];
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    scale_grads(local, inv);
    if (grads) *grads = std::move(local);
    return loss_sum * inv;
}

double dataset_loss(const ResidualDenoiser& net, const PairDataset& data,
                    const std::vector<std::size_t>& idx) {
    if (idx.empty()) throw ContractError("dataset_loss: empty index set");
    const int side = side_of(data);
    const std::size_t n_pix = static_cast<std::size_t>(side) * side;
    double total = 0.0;
    for (std::size_t s : idx) {
        const auto den = net.denoise(data.noisy[s], side, side);
        double acc = 0.0;
        for (std::size_t j = 0; j < n_pix; ++j) {
            const double d = den[j] - data.clean[s][j];
            acc += d * d;
        }
        total += acc / static_cast<double>(n_pix);
    }
    return total / static_cast<double>(idx.size());
}

double dataset_loss(const ResidualDenoiser& net, const PairDataset& data) {
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    return dataset_loss(net, data, idx);
}

ResidualDenoiser pretrain(const PairDataset& source, const NetArch& arch, const TrainConfig& cfg,
                          TrainCurve* curve) {
    if (source.role != PairDataset::Role::source)
        throw ContractError("pretrain: dataset role must be source");
    source.validate();
    ResidualDenoiser net = ResidualDenoiser::he_init(arch, cfg.seed);
    net.sigma_train = source.noise_sigma;
    if (cfg.epochs > 0) net = run_sgd(std::move(net), source, cfg, curve);
    net.provenance = Provenance::pretrained;
    net.adapted_pairs = 0;
    return net;
}

ResidualDenoiser adapt(const ResidualDenoiser& source_params, const PairDataset& target,
                       const TrainConfig& cfg, TrainCurve* curve, std::string* warning) {
    if (target.role != PairDataset::Role::target)
        throw ContractError("adapt: dataset role must be target");
    if (warning) warning->clear();
    if (source_params.provenance != Provenance::pretrained && warning)
        *warning = "adapt: starting point is " +
                   provenance_name(source_params.provenance, source_params.adapted_pairs) +
                   ", not pretrained; running anyway";

    ResidualDenoiser net = source_params;
    net.adapted_pairs = static_cast<int>(target.size());
    net.provenance = Provenance::adapted;
    if (target.size() == 0) return net;  // adapted(0): source weights unchanged

    net.sigma_train = target.noise_sigma;
    if (cfg.epochs > 0) net = run_sgd(std::move(net), target, cfg, curve);
    net.provenance = Provenance::adapted;
    net.adapted_pairs = static_cast<int>(target.size());
    return net;
}

}  // namespace prsans::nn
