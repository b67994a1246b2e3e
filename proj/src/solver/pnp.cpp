#include "prsans/solver/pnp.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>

#include "prsans/csv.hpp"
#include "prsans/errors.hpp"
#include "prsans/parallel.hpp"
#include "prsans/priors/gmm_prior.hpp"

namespace prsans::solver {

namespace {

double norm2(const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(deterministic_sum(a.size(), [&](std::size_t j) {
        const double d = a[j] - b[j];
        return d * d;
    }));
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// f(x) = 0.5||x - y||^2 + h(x) and ||grad f(x)|| with the exact mixture
// regularizer, regardless of any wrapper perturbation.
void analytic_eval(const priors::GmmPrior& gmm, double sigma, double tau,
                   const std::vector<double>& x, const std::vector<double>& y, double* f_out,
                   double* grad_norm_out) {
    const auto reg = priors::gmm_regularizer(gmm, x, sigma, tau);
    const double data_term = 0.5 * deterministic_sum(x.size(), [&](std::size_t j) {
        const double d = x[j] - y[j];
        return d * d;
    });
    if (f_out) *f_out = data_term + reg.h_value;
    if (grad_norm_out)
        *grad_norm_out = std::sqrt(deterministic_sum(x.size(), [&](std::size_t j) {
            const double g = (x[j] - y[j]) + reg.h_grad[j];
            return g * g;
        }));
}

}  // namespace

void SolveConfig::validate() const {
    if (!(gamma > 0.0)) throw ContractError("SolveConfig: gamma must be positive");
    if (!(tau > 0.0)) throw ContractError("SolveConfig: tau must be positive");
    if (max_iter < 1) throw ContractError("SolveConfig: max_iter must be >= 1");
    if (!(fp_tol >= 0.0)) throw ContractError("SolveConfig: fp_tol must be >= 0");
}

std::vector<double> prox_data_fidelity(const std::vector<double>& v, const std::vector<double>& y,
                                       double gamma) {
    if (!(gamma > 0.0)) throw ContractError("prox_data_fidelity: gamma must be positive");
    if (v.size() != y.size()) throw ContractError("prox_data_fidelity: shape mismatch");
    std::vector<double> out(v.size());
    const double inv = 1.0 / (1.0 + gamma);
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < static_cast<long long>(v.size()); ++j)
        out[static_cast<std::size_t>(j)] =
            (v[static_cast<std::size_t>(j)] + gamma * y[static_cast<std::size_t>(j)]) * inv;
    return out;
}

std::vector<double> pr_sans_step(const std::vector<double>& x_prev, const std::vector<double>& y,
                                 priors::PriorHandle& prior, const SolveConfig& cfg,
                                 priors::Shape shape) {
    cfg.validate();
    if (x_prev.size() != y.size()) throw ContractError("pr_sans_step: shape mismatch");
    const auto den = prior.apply(x_prev, shape);
    std::vector<double> inner(x_prev.size());
    const double gt = cfg.gamma * cfg.tau;
#pragma omp parallel for schedule(static)
    for (long long j = 0; j < static_cast<long long>(inner.size()); ++j) {
        const auto k = static_cast<std::size_t>(j);
        inner[k] = x_prev[k] - gt * (x_prev[k] - den[k]);
    }
    return prox_data_fidelity(inner, y, cfg.gamma);
}

SolveResult pr_sans_solve(const std::vector<double>& y, priors::PriorHandle prior,
                          const SolveConfig& cfg, priors::Shape shape,
                          const std::vector<double>* x0) {
    cfg.validate();
    if (!all_finite(y)) throw ContractError("pr_sans_solve: non-finite data");
    std::vector<double> x_prev = x0 ? *x0 : y;
    if (x_prev.size() != y.size()) throw ContractError("pr_sans_solve: x0 shape mismatch");
    if (!all_finite(x_prev)) throw ContractError("pr_sans_solve: non-finite start point");

    const priors::GmmPrior* gmm = prior.analytic_gmm();
    const double sigma = prior.analytic_sigma();
    const auto* schedule = prior.schedule();

    SolveResult res;
    SolveTrace& tr = res.trace;
    if (gmm) analytic_eval(*gmm, sigma, cfg.tau, x_prev, y, &tr.f0, nullptr);

    for (int k = 1; k <= cfg.max_iter; ++k) {
        const double eps = schedule ? schedule->at(prior.calls_made()) : 0.0;
        std::vector<double> x = pr_sans_step(x_prev, y, prior, cfg, shape);
        if (!all_finite(x)) throw DivergenceError(k);

        tr.epsilons.push_back(eps);
        tr.step_norms.push_back(norm2(x, x_prev));
        if (gmm) {
            double f = 0.0, gn = 0.0;
            analytic_eval(*gmm, sigma, cfg.tau, x, y, &f, &gn);
            tr.f_values.push_back(f);
            tr.grad_norms.push_back(gn);
        }
        if (cfg.trace_level == TraceLevel::full) tr.iterates.push_back(x);

        x_prev = std::move(x);
        tr.iterations = k;
        if (cfg.fp_tol > 0.0 && tr.step_norms.back() < cfg.fp_tol) break;
    }

    // Residual of iterate x^k equals the next step's norm; the final
    // iterate needs one probe step, which consumes the wrapper's next
    // scheduled level like any other step.
    const int T = tr.iterations;
    tr.fixed_point_residuals.resize(static_cast<std::size_t>(T), 0.0);
    for (int k = 1; k < T; ++k)
        tr.fixed_point_residuals[static_cast<std::size_t>(k - 1)] =
            tr.step_norms[static_cast<std::size_t>(k)];
    {
        const auto probe = pr_sans_step(x_prev, y, prior, cfg, shape);
        if (!all_finite(probe)) throw DivergenceError(T + 1);
        tr.fixed_point_residuals[static_cast<std::size_t>(T - 1)] = norm2(x_prev, probe);
    }

    res.x = std::move(x_prev);
    return res;
}

double fixed_point_residual(const std::vector<double>& x, const std::vector<double>& y,
                            priors::PriorHandle prior, const SolveConfig& cfg,
                            priors::Shape shape) {
    const auto next = pr_sans_step(x, y, prior, cfg, shape);
    return norm2(x, next);
}

std::string SolveTrace::to_csv() const {
    std::ostringstream os;
    os << "k,f,grad_norm,step_norm,epsilon,fp_residual\n";
    for (int k = 1; k <= iterations; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        os << k << ",";
        os << (i < f_values.size() ? fmt_full(f_values[i]) : std::string{}) << ",";
        os << (i < grad_norms.size() ? fmt_full(grad_norms[i]) : std::string{}) << ",";
        os << fmt_full(step_norms[i]) << "," << fmt_full(epsilons[i]) << ","
           << fmt_full(fixed_point_residuals[i]) << "\n";
    }
    return os.str();
}

}  // namespace prsans::solver
