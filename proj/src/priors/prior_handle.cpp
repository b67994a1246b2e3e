#include "prsans/priors/prior_handle.hpp"

#include <cstddef>
#include <utility>

#include "prsans/errors.hpp"
#include "prsans/nn/net.hpp"
#include "prsans/priors/blur.hpp"
#include "prsans/rng.hpp"

namespace prsans::priors {

PriorHandle PriorHandle::make_gmm(GmmPrior gmm, double sigma) {
    gmm.validate();
    if (!(sigma > 0.0)) throw ContractError("PriorHandle: gmm sigma must be positive");
    PriorHandle h;
    h.kind_ = PriorKind::gmm_mmse;
    h.gmm_ = std::make_shared<const GmmPrior>(std::move(gmm));
    h.sigma_ = sigma;
    return h;
}

PriorHandle PriorHandle::make_tv(TvOptions opt) {
    if (!(opt.strength >= 0.0)) throw ContractError("PriorHandle: tv strength must be >= 0");
    PriorHandle h;
    h.kind_ = PriorKind::tv;
    h.tv_ = opt;
    return h;
}

PriorHandle PriorHandle::make_blur(double sigma) {
    if (!(sigma >= 0.0)) throw ContractError("PriorHandle: blur sigma must be >= 0");
    PriorHandle h;
    h.kind_ = PriorKind::gaussian_blur;
    h.blur_sigma_ = sigma;
    return h;
}

PriorHandle PriorHandle::make_learned(std::shared_ptr<const nn::ResidualDenoiser> net) {
    if (!net) throw ContractError("PriorHandle: null network");
    PriorHandle h;
    h.kind_ = PriorKind::learned;
    h.net_ = std::move(net);
    return h;
}

PriorHandle PriorHandle::make_inexact(PriorHandle base, EpsilonSchedule schedule,
                                      std::uint64_t seed) {
    if (base.kind() == PriorKind::inexact)
        throw ContractError("PriorHandle: inexact wrappers do not nest");
    PriorHandle h;
    h.kind_ = PriorKind::inexact;
    h.base_ = std::make_shared<const PriorHandle>(std::move(base));
    h.schedule_ = std::move(schedule);
    h.seed_ = seed;
    return h;
}

std::string PriorHandle::kind_name() const {
    switch (kind_) {
        case PriorKind::gmm_mmse:
            return "gmm_mmse";
        case PriorKind::tv:
            return "tv";
        case PriorKind::gaussian_blur:
            return "gaussian_blur";
        case PriorKind::learned:
            return "learned";
        case PriorKind::inexact:
            return "inexact(" + base_->kind_name() + ")";
    }
    throw ContractError("PriorHandle: bad kind");
}

std::vector<double> PriorHandle::apply_stateless(const std::vector<double>& z, Shape shape) const {
    if (shape.width < 1 || shape.height < 1) throw ContractError("PriorHandle: bad shape");
    if (z.size() != static_cast<std::size_t>(shape.width) * shape.height)
        throw ContractError("PriorHandle: data length does not match shape");
    switch (kind_) {
        case PriorKind::gmm_mmse:
            return gmm_mmse_denoise(*gmm_, z, sigma_);
        case PriorKind::tv:
            return tv_denoise(z, shape.width, shape.height, tv_);
        case PriorKind::gaussian_blur:
            return gaussian_blur(z, shape.width, shape.height, blur_sigma_);
        case PriorKind::learned:
            return net_->denoise(z, shape.width, shape.height);
        case PriorKind::inexact:
            break;
    }
    throw ContractError("PriorHandle: bad kind");
}

std::vector<double> PriorHandle::apply(const std::vector<double>& z, Shape shape) {
    if (kind_ != PriorKind::inexact) return apply_stateless(z, shape);

    auto out = base_->apply_stateless(z, shape);
    const double eps = schedule_.at(calls_);
    if (eps > 0.0) {
        Rng rng(substream_seed(substream_seed(seed_, "inexact"),
                               static_cast<std::uint64_t>(calls_)));
        const auto u = rng.unit_vector(out.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += eps * u[j];
    }
    ++calls_;
    return out;
}

const GmmPrior* PriorHandle::analytic_gmm() const {
    if (kind_ == PriorKind::gmm_mmse) return gmm_.get();
    if (kind_ == PriorKind::inexact) return base_->analytic_gmm();
    return nullptr;
}

double PriorHandle::analytic_sigma() const {
    if (kind_ == PriorKind::gmm_mmse) return sigma_;
    if (kind_ == PriorKind::inexact) return base_->analytic_sigma();
    return 0.0;
}

const EpsilonSchedule* PriorHandle::schedule() const {
    return kind_ == PriorKind::inexact ? &schedule_ : nullptr;
}

const PriorHandle* PriorHandle::base() const {
    return kind_ == PriorKind::inexact ? base_.get() : nullptr;
}

}  // namespace prsans::priors
