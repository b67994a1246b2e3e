#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prsans/priors/epsilon_schedule.hpp"
#include "prsans/priors/gmm_prior.hpp"
#include "prsans/priors/tv.hpp"

namespace prsans::nn {
struct ResidualDenoiser;
}

namespace prsans::priors {

enum class PriorKind { gmm_mmse, tv, gaussian_blur, learned, inexact };

struct Shape {
    int width = 0;
    int height = 1;  // plain vectors are shape {n, 1}
};

// Uniform plug-in denoiser interface for the restoration iteration. All
// kinds are stateless except the inexact wrapper, which counts calls to
// index its schedule; copying a handle gives an independent counter.
class PriorHandle {
public:
    static PriorHandle make_gmm(GmmPrior gmm, double sigma);
    static PriorHandle make_tv(TvOptions opt);
    static PriorHandle make_blur(double sigma);
    static PriorHandle make_learned(std::shared_ptr<const nn::ResidualDenoiser> net);
    // base must itself be exact (no nesting of wrappers). Perturbation
    // direction depends only on (seed, call index), never on the input, and
    // its norm is exactly the scheduled level.
    static PriorHandle make_inexact(PriorHandle base, EpsilonSchedule schedule,
                                    std::uint64_t seed);

    PriorKind kind() const { return kind_; }
    std::string kind_name() const;

    std::vector<double> apply(const std::vector<double>& z, Shape shape);

    int calls_made() const { return calls_; }
    void reset_calls() { calls_ = 0; }

    // Reaches through the inexact wrapper; null / 0 when the underlying
    // denoiser is not a mixture posterior mean.
    const GmmPrior* analytic_gmm() const;
    double analytic_sigma() const;

    const EpsilonSchedule* schedule() const;  // inexact only, else null
    const PriorHandle* base() const;          // inexact only, else null

private:
    std::vector<double> apply_stateless(const std::vector<double>& z, Shape shape) const;

    PriorKind kind_ = PriorKind::gmm_mmse;
    std::shared_ptr<const GmmPrior> gmm_;
    double sigma_ = 0.0;
    TvOptions tv_;
    double blur_sigma_ = 0.0;
    std::shared_ptr<const nn::ResidualDenoiser> net_;
    std::shared_ptr<const PriorHandle> base_;
    EpsilonSchedule schedule_;
    std::uint64_t seed_ = 0;
    int calls_ = 0;
};

}  // namespace prsans::priors
