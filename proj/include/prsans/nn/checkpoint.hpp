#pragma once

#include <string>

#include "prsans/nn/net.hpp"

namespace prsans::nn {

// Checkpoint container: 8-byte magic, u32 version, u32 JSON header length,
// header (architecture, provenance, sigma_train, seed), then the flat
// parameter vector as little-endian f32 in declared layer order (weights
// then bias per layer). Parameters are held in double in memory; saving
// rounds to f32.
void save_checkpoint(const ResidualDenoiser& net, const std::string& path);
ResidualDenoiser load_checkpoint(const std::string& path);

}  // namespace prsans::nn
