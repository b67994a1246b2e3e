#pragma once

#include <limits>
#include <string>
#include <vector>

#include "prsans/priors/prior_handle.hpp"

namespace prsans::solver {

enum class TraceLevel { final, norms, full };

struct SolveConfig {
    double gamma = 0.7;  // penalty / implicit step parameter
    double tau = 1.0;    // regularization weight
    int max_iter = 20;
    double fp_tol = 0.0;  // 0 runs all iterations
    TraceLevel trace_level = TraceLevel::norms;
    void validate() const;
};

// One row per executed iteration k = 1..iterations. f_values/grad_norms are
// filled only when the prior exposes the analytic mixture (directly or
// through the inexact wrapper); they are evaluated with the exact prior.
struct SolveTrace {
    std::vector<std::vector<double>> iterates;  // trace_level full only
    std::vector<double> f_values;
    std::vector<double> grad_norms;
    std::vector<double> step_norms;
    std::vector<double> epsilons;  // schedule level consumed by each step
    std::vector<double> fixed_point_residuals;
    double f0 = std::numeric_limits<double>::quiet_NaN();  // f at the start point
    int iterations = 0;

    std::string to_csv() const;  // k,f,grad_norm,step_norm,epsilon,fp_residual
};

struct SolveResult {
    std::vector<double> x;
    SolveTrace trace;
};

// (v + gamma y) / (1 + gamma): exact minimizer of
// 0.5||x - v||^2 + gamma 0.5||x - y||^2.
std::vector<double> prox_data_fidelity(const std::vector<double>& v, const std::vector<double>& y,
                                       double gamma);

// x_next = prox(x_prev - gamma tau (x_prev - prior(x_prev)), y, gamma).
std::vector<double> pr_sans_step(const std::vector<double>& x_prev, const std::vector<double>& y,
                                 priors::PriorHandle& prior, const SolveConfig& cfg,
                                 priors::Shape shape);

// Iterates pr_sans_step from x0 (default y) until the step norm falls
// below fp_tol or max_iter is reached. The solve owns its prior copy, so a
// stateful wrapper's counter starts at the caller's position and advances
// privately. The last fixed-point residual comes from one extra probe
// step; earlier entries reuse the following step's norm.
SolveResult pr_sans_solve(const std::vector<double>& y, priors::PriorHandle prior,
                          const SolveConfig& cfg, priors::Shape shape,
                          const std::vector<double>* x0 = nullptr);

// ||x - pr_sans_step(x)|| measured on a private copy of the prior.
double fixed_point_residual(const std::vector<double>& x, const std::vector<double>& y,
                            priors::PriorHandle prior, const SolveConfig& cfg,
                            priors::Shape shape);

}  // namespace prsans::solver
