#include "prsans/priors/gmm_prior.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "json.hpp"
#include "prsans/errors.hpp"
#include "prsans/parallel.hpp"

namespace prsans::priors {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Per-component log joint log w_i + log N(z; mu_i, (s_i^2+sigma^2) I).
std::vector<double> component_log_terms(const GmmPrior& gmm, const std::vector<double>& z,
                                        double sigma) {
    const std::size_t n = z.size();
    std::vector<double> a(gmm.components.size());
    for (std::size_t i = 0; i < gmm.components.size(); ++i) {
        const auto& comp = gmm.components[i];
        const double v = comp.variance + sigma * sigma;
        const double* mu = comp.mean.data();
        const double* zd = z.data();
        const double sq = deterministic_sum(n, [zd, mu](std::size_t j) {
            const double d = zd[j] - mu[j];
            return d * d;
        });
        a[i] = std::log(comp.weight) - 0.5 * static_cast<double>(n) * (kLog2Pi + std::log(v)) -
               sq / (2.0 * v);
    }
    return a;
}

double log_sum_exp(const std::vector<double>& a) {
    const double m = *std::max_element(a.begin(), a.end());
    double s = 0.0;
    for (double ai : a) s += std::exp(ai - m);
    return m + std::log(s);
}

}  // namespace

void GmmPrior::validate() const {
    if (components.empty()) throw ContractError("GmmPrior: no components");
    const std::size_t n = components.front().mean.size();
    if (n == 0) throw ContractError("GmmPrior: zero-dimensional mean");
    double wsum = 0.0;
    for (const auto& comp : components) {
        if (!(comp.weight > 0.0)) throw ContractError("GmmPrior: weights must be positive");
        if (!(comp.variance > 0.0)) throw ContractError("GmmPrior: variances must be positive");
        if (comp.mean.size() != n) throw ContractError("GmmPrior: inconsistent mean dimensions");
        for (double mj : comp.mean)
            if (!std::isfinite(mj)) throw ContractError("GmmPrior: non-finite mean entry");
        wsum += comp.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12) throw ContractError("GmmPrior: weights must sum to 1");
}

std::string GmmPrior::to_json() const {
    nlohmann::json j;
    auto& weights = j["weights"] = nlohmann::json::array();
    auto& means = j["means"] = nlohmann::json::array();
    auto& variances = j["variances"] = nlohmann::json::array();
    for (const auto& comp : components) {
        weights.push_back(comp.weight);
        means.push_back(comp.mean);
        variances.push_back(comp.variance);
    }
    return j.dump(2) + "\n";
}

GmmPrior GmmPrior::from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& weights = j.at("weights");
        const auto& means = j.at("means");
        const auto& variances = j.at("variances");
        if (weights.size() != means.size() || weights.size() != variances.size())
            throw ConfigError("gmm", "weights, means, variances must have equal length");
        GmmPrior gmm;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            GmmPrior::Component comp;
            comp.weight = weights[i].get<double>();
            comp.mean = means[i].get<std::vector<double>>();
            comp.variance = variances[i].get<double>();
            gmm.components.push_back(std::move(comp));
        }
        gmm.validate();
        return gmm;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("gmm", e.what());
    }
}

std::vector<double> gmm_mmse_denoise(const GmmPrior& gmm, const std::vector<double>& z,
                                     double sigma) {
    gmm.validate();
    if (z.size() != gmm.dim()) throw ContractError("gmm_mmse_denoise: dimension mismatch");
    if (!(sigma > 0.0)) throw ContractError("gmm_mmse_denoise: sigma must be positive");

    const auto a = component_log_terms(gmm, z, sigma);
    const double lse = log_sum_exp(a);
    const double sig2 = sigma * sigma;

    const std::size_t n = z.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < gmm.components.size(); ++i) {
        const auto& comp = gmm.components[i];
        const double r = std::exp(a[i] - lse);
        const double v = comp.variance + sig2;
        const double cz = r * comp.variance / v;
        const double cm = r * sig2 / v;
        const double* mu = comp.mean.data();
        double* od = out.data();
        const double* zd = z.data();
#pragma omp parallel for schedule(static)
        for (long long j = 0; j < static_cast<long long>(n); ++j)
            od[j] += cz * zd[j] + cm * mu[j];
    }
    return out;
}

double gmm_log_pz(const GmmPrior& gmm, const std::vector<double>& z, double sigma) {
    gmm.validate();
    if (z.size() != gmm.dim()) throw ContractError("gmm_log_pz: dimension mismatch");
    if (!(sigma > 0.0)) throw ContractError("gmm_log_pz: sigma must be positive");
    return log_sum_exp(component_log_terms(gmm, z, sigma));
}

RegularizerEval gmm_regularizer(const GmmPrior& gmm, const std::vector<double>& z, double sigma,
                                double tau) {
    RegularizerEval eval;
    eval.h_value = -tau * sigma * sigma * gmm_log_pz(gmm, z, sigma);
    const auto den = gmm_mmse_denoise(gmm, z, sigma);
    eval.h_grad.resize(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) eval.h_grad[j] = tau * (z[j] - den[j]);
    return eval;
}

}  // namespace prsans::priors
