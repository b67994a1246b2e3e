#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prsans/nn/net.hpp"

namespace prsans::nn {

// Clean/noisy patch pairs on one side of the adaptation split. Pairs either
// come from internal AWGN synthesis or are supplied externally (for target
// pairs drawn from simulated acquisitions).
struct PairDataset {
    enum class Role { source, target };
    Role role = Role::source;
    int patch = 40;
    double noise_sigma = 5.0 / 255.0;
    std::vector<std::vector<double>> clean;
    std::vector<std::vector<double>> noisy;

    std::size_t size() const { return clean.size(); }
    void validate() const;
};

struct TrainConfig {
    int epochs = 50;
    double lr = 0.1;
    double momentum = 0.9;
    int batch = 16;
    double val_fraction = 0.1;  // tail fraction held out for snapshot selection
    std::uint64_t seed = 0;
    int shards = 1;  // disjoint batch shards, gradients summed in shard order
};

struct TrainCurve {
    std::vector<double> train_loss;
    std::vector<double> val_loss;  // empty when no validation split
    int best_epoch = -1;
};

using GradBuffer = std::vector<ConvLayer>;

GradBuffer zero_grads(const ResidualDenoiser& net);

// Mean over the batch of ||clean - denoise(noisy)||^2 / pixel_count and its
// parameter gradient by reverse accumulation with the exact padding
// adjoint. Per-sample contributions are summed in batch order.
double loss_and_grad(const ResidualDenoiser& net, const PairDataset& data,
                     const std::vector<std::size_t>& batch, GradBuffer* grads, int shards = 1);

double dataset_loss(const ResidualDenoiser& net, const PairDataset& data,
                    const std::vector<std::size_t>& idx);
double dataset_loss(const ResidualDenoiser& net, const PairDataset& data);

// Seeded minibatch SGD with momentum, one 10x learning-rate decay at 80% of
// the epochs, returning the snapshot with the lowest validation loss (train
// loss when there is no validation split).
ResidualDenoiser pretrain(const PairDataset& source, const NetArch& arch, const TrainConfig& cfg,
                          TrainCurve* curve = nullptr);

// Same loop started from source_params. K = 0 returns the source weights
// relabeled adapted(0). A non-pretrained start is tolerated for baseline
// comparisons; the diagnostic (if any) is returned through `warning`.
ResidualDenoiser adapt(const ResidualDenoiser& source_params, const PairDataset& target,
                       const TrainConfig& cfg, TrainCurve* curve = nullptr,
                       std::string* warning = nullptr);

}  // namespace prsans::nn
