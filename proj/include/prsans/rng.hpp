#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace prsans {

// Derive an independent stream seed from a master seed and a stream name.
// All randomness in a run flows from one master seed through named
// sub-streams (noise, init, shuffle, perturbation, ...), so changing one
// stage leaves the others bit-identical.
std::uint64_t substream_seed(std::uint64_t master, std::string_view name);
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t id);

// Deterministic generator with explicit, platform-independent output
// sequences (splitmix64 state advance, Box-Muller normals). Cheap to
// construct, so per-pixel / per-call instances are fine inside parallel
// loops.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    Rng(std::uint64_t seed, std::string_view stream) : Rng(substream_seed(seed, stream)) {}

    std::uint64_t next_u64();
    double uniform01();  // [0, 1)
    double normal();     // standard normal
    long long poisson(double mean);

    // Uniformly distributed direction on the unit sphere in R^n.
    std::vector<double> unit_vector(std::size_t n);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace prsans
