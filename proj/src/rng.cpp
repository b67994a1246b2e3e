#include "prsans/rng.hpp"

#include <cmath>

#include "prsans/errors.hpp"

namespace prsans {

namespace {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
    std::uint64_t s = master ^ fnv1a64(name);
    splitmix64(s);  // decorrelate nearby masters
    return splitmix64(s);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t id) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (id + 1));
    splitmix64(s);
    return splitmix64(s);
}

Rng::Rng(std::uint64_t seed) : state_(seed) {
    // burn-in so seed=0 and seed=1 diverge immediately
    splitmix64(state_);
    splitmix64(state_);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1-u keeps the log argument in (0, 1]
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

long long Rng::poisson(double mean) {
    if (!(mean >= 0.0)) throw ContractError("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 256.0) {
        // Knuth multiplication method, exact
        const double limit = std::exp(-mean);
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }
    // Large mean: rounded Gaussian approximation
    const double x = mean + std::sqrt(mean) * normal();
    return x <= 0.0 ? 0 : static_cast<long long>(std::llround(x));
}

std::vector<double> Rng::unit_vector(std::size_t n) {
    if (n == 0) throw ContractError("unit_vector: n must be >= 1");
    std::vector<double> v(n);
    double nrm2 = 0.0;
    do {
        nrm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = normal();
            nrm2 += v[i] * v[i];
        }
    } while (nrm2 == 0.0);
    const double inv = 1.0 / std::sqrt(nrm2);
    for (double& x : v) x *= inv;
    return v;
}

}  // namespace prsans
