#pragma once

#include <cstdint>
#include <vector>

#include "prsans/nn/train.hpp"

namespace prsans::nn {

// Procedural grayscale textures in [0,1]: smoothed blob fields, oriented
// gratings, and polygon step edges, cycled per patch. Noisy = clean + AWGN.
PairDataset make_texture_dataset(int n_patches, int patch, double sigma, std::uint64_t seed);

// Seeded random crops from full images with 8-fold dihedral augmentation;
// noisy side synthesized as clean + AWGN.
PairDataset patches_awgn(const std::vector<std::vector<double>>& images, int width, int height,
                         int n_patches, int patch, double sigma, std::uint64_t seed,
                         PairDataset::Role role);

// Same cropping/augmentation but the noisy side is cut from supplied noisy
// images (externally realized noise, e.g. simulated acquisitions).
// noise_sigma_hint is recorded on the dataset for provenance only.
PairDataset patches_from_pairs(const std::vector<std::vector<double>>& clean_images,
                               const std::vector<std::vector<double>>& noisy_images, int width,
                               int height, int n_patches, int patch, std::uint64_t seed,
                               PairDataset::Role role, double noise_sigma_hint);

// Dihedral transform t in [0,8): composition of transpose and flips
// applied to a square patch.
std::vector<double> dihedral_apply(const std::vector<double>& patch, int side, int t);

}  // namespace prsans::nn
