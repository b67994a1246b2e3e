#include "prsans/sans/acquire.hpp"

#include <cmath>
#include <cstddef>

#include "prsans/errors.hpp"
#include "prsans/rng.hpp"

namespace prsans::sans {

void AcquireOptions::validate() const {
    if (!(time_factor > 0.0)) throw ContractError("AcquireOptions: time_factor must be > 0");
    if (!(flux_scale > 0.0)) throw ContractError("AcquireOptions: flux_scale must be > 0");
    if (mode == Mode::awgn && !(awgn_sigma >= 0.0))
        throw ContractError("AcquireOptions: awgn_sigma must be >= 0");
}

DetectorImage simulate_acquisition(const DetectorImage& clean, const AcquireOptions& opt,
                                   std::uint64_t seed) {
    clean.validate();
    opt.validate();
    if (opt.mode == AcquireOptions::Mode::poisson)
        for (std::size_t i = 0; i < clean.data.size(); ++i)
            if (clean.valid_at(i) && clean.data[i] < 0.0f)
                throw ContractError("simulate_acquisition: negative intensity under Poisson mode");

    DetectorImage out = clean;
    out.acq_time = opt.time_factor;
    const double tf = opt.time_factor * opt.flux_scale;
    const std::uint64_t noise_seed = substream_seed(seed, "noise");
    const long long n = static_cast<long long>(clean.data.size());

#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!clean.valid_at(idx)) {
            out.data[idx] = 0.0f;
            continue;
        }
        Rng rng(substream_seed(noise_seed, static_cast<std::uint64_t>(i)));
        if (opt.mode == AcquireOptions::Mode::poisson) {
            const double lam = tf * static_cast<double>(clean.data[idx]);
            out.data[idx] = static_cast<float>(static_cast<double>(rng.poisson(lam)) / tf);
        } else {
            const double sd = opt.awgn_sigma / std::sqrt(opt.time_factor);
            out.data[idx] = static_cast<float>(static_cast<double>(clean.data[idx]) +
                                               sd * rng.normal());
        }
    }
    return out;
}

}  // namespace prsans::sans
