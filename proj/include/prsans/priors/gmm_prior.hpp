#pragma once

#include <string>
#include <vector>

namespace prsans::priors {

// Finite isotropic Gaussian mixture prior over R^n. Isotropic per-component
// variances keep the posterior mean, the observation density and its score
// in closed form. Positive variances make the density non-degenerate.
struct GmmPrior {
    struct Component {
        double weight = 0.0;
        std::vector<double> mean;
        double variance = 0.0;  // isotropic s_i^2
    };
    std::vector<Component> components;

    std::size_t dim() const { return components.empty() ? 0 : components.front().mean.size(); }
    void validate() const;  // weights > 0 summing to 1 (1e-12), variances > 0, equal dims

    std::string to_json() const;
    static GmmPrior from_json(const std::string& text);
};

// Posterior mean E[x|z] for z = x + N(0, sigma^2 I) under the mixture:
// responsibilities over N(mu_i, (s_i^2+sigma^2) I) combined with the
// per-component conjugate means (s_i^2 z + sigma^2 mu_i)/(s_i^2+sigma^2).
// Stabilized with log-sum-exp.
std::vector<double> gmm_mmse_denoise(const GmmPrior& gmm, const std::vector<double>& z,
                                     double sigma);

// log p_z(z), the observation density of z = x + N(0, sigma^2 I).
double gmm_log_pz(const GmmPrior& gmm, const std::vector<double>& z, double sigma);

// Implicit regularizer h(z) = -tau sigma^2 log p_z(z) and its gradient
// tau (z - D_sigma(z)); the score identity makes the two routes agree.
struct RegularizerEval {
    double h_value = 0.0;
    std::vector<double> h_grad;
};
RegularizerEval gmm_regularizer(const GmmPrior& gmm, const std::vector<double>& z, double sigma,
                                double tau);

}  // namespace prsans::priors
