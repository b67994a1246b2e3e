#include "prsans/theory/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "prsans/csv.hpp"
#include "prsans/errors.hpp"
#include "prsans/parallel.hpp"
#include "prsans/rng.hpp"

namespace prsans::theory {

namespace {

double norm2_diff(const std::vector<double>& a, const std::vector<double>& b) {
    return std::sqrt(deterministic_sum(a.size(), [&](std::size_t j) {
        const double d = a[j] - b[j];
        return d * d;
    }));
}

double norm2(const std::vector<double>& a) {
    return std::sqrt(deterministic_sum(a.size(), [&](std::size_t j) { return a[j] * a[j]; }));
}

}  // namespace

std::vector<double> grad_objective(const std::vector<double>& x, const std::vector<double>& y,
                                   const priors::GmmPrior& gmm, double sigma, double tau) {
    if (x.size() != y.size()) throw ContractError("grad_objective: shape mismatch");
    const auto reg = priors::gmm_regularizer(gmm, x, sigma, tau);
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = (x[j] - y[j]) + reg.h_grad[j];
    return g;
}

double objective(const std::vector<double>& x, const std::vector<double>& y,
                 const priors::GmmPrior& gmm, double sigma, double tau) {
    if (x.size() != y.size()) throw ContractError("objective: shape mismatch");
    double data = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        data += d * d;
    }
    return 0.5 * data - tau * sigma * sigma * priors::gmm_log_pz(gmm, x, sigma);
}

LipschitzEstimate estimate_lipschitz_M(const priors::GmmPrior& gmm, double sigma, double tau,
                                       double box_lo, double box_hi, int n_samples,
                                       std::uint64_t seed) {
    gmm.validate();
    if (n_samples < 2) throw ContractError("estimate_lipschitz_M: need n_samples >= 2");
    if (!(box_hi > box_lo)) throw ContractError("estimate_lipschitz_M: empty box");
    const std::size_t dim = gmm.dim();

    auto grad_h = [&](const std::vector<double>& z) {
        return priors::gmm_regularizer(gmm, z, sigma, tau).h_grad;
    };

    Rng rng(substream_seed(seed, "lipschitz"));
    double best = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        std::vector<double> u(dim), v(dim);
        for (auto& uj : u) uj = box_lo + (box_hi - box_lo) * rng.uniform01();
        if (s % 2 == 0) {
            // far pair
            for (auto& vj : v) vj = box_lo + (box_hi - box_lo) * rng.uniform01();
        } else {
            // near pair probes local curvature
            const double h = 1e-4 * (box_hi - box_lo);
            for (std::size_t j = 0; j < dim; ++j) v[j] = u[j] + h * rng.normal();
        }
        const double dist = norm2_diff(u, v);
        if (dist <= 0.0) continue;
        const auto gu = grad_h(u);
        const auto gv = grad_h(v);
        const double ratio = norm2_diff(gu, gv) / dist;
        best = std::max(best, ratio);
    }

    LipschitzEstimate est;
    est.sampled = best;
    est.inflated = best * 1.2;
    if (gmm.components.size() == 1) {
        const double s2 = gmm.components.front().variance;
        est.exact_single_gaussian = tau * sigma * sigma / (s2 + sigma * sigma);
    }
    return est;
}

TheoremConstants compute_constants(double gamma, double tau, double L, double M) {
    if (!(gamma > 0.0) || !(tau > 0.0)) throw ContractError("compute_constants: gamma, tau > 0");
    if (!(L > 0.0) || !(M > 0.0) || !std::isfinite(L) || !std::isfinite(M))
        throw ContractError("compute_constants: L, M must be positive finite");
    if (gamma >= 1.0 / M || gamma >= 1.0 / L)
        throw ContractError("compute_constants: infeasible step, gamma must be < min(1/M, 1/L)");
    TheoremConstants c;
    c.gamma = gamma;
    c.tau = tau;
    c.L = L;
    c.M = M;
    c.lambda = 1.0 / gamma + L;
    c.alpha = gamma * tau / (1.0 - gamma * L);
    c.alpha_statement = (gamma * tau < 1.0) ? gamma * tau / (1.0 - gamma * tau)
                                            : std::numeric_limits<double>::infinity();
    const double gm = gamma * M;
    c.B1 = 4.0 * (1.0 + gm) * (1.0 + gm) / (gamma * (1.0 - gm));
    const double gl = gamma * L;
    c.B2 = c.lambda * c.alpha * c.alpha * c.B1 / 2.0 +
           2.0 * c.alpha * c.alpha * (1.0 + gl) * (1.0 + gl) / (gamma * gamma);
    return c;
}

double max_feasible_gamma(double L, double M) {
    if (!(L > 0.0) || !(M > 0.0)) throw ContractError("max_feasible_gamma: L, M must be positive");
    return (1.0 - 1e-6) * std::min(1.0 / L, 1.0 / M);
}

ReferenceOptimum solve_reference_fstar(const std::vector<double>& y, const priors::GmmPrior& gmm,
                                       double sigma, double tau) {
    gmm.validate();
    if (y.size() != gmm.dim()) throw ContractError("solve_reference_fstar: shape mismatch");

    std::vector<std::vector<double>> starts;
    for (const auto& comp : gmm.components) starts.push_back(comp.mean);
    starts.push_back(y);

    ReferenceOptimum ref;
    std::vector<std::vector<double>> found;
    const double eta0 = 0.5 / (1.0 + tau);

    for (const auto& start : starts) {
        std::vector<double> x = start;
        double eta = eta0;
        double fx = objective(x, y, gmm, sigma, tau);
        for (int it = 0; it < 50000; ++it) {
            const auto g = grad_objective(x, y, gmm, sigma, tau);
            const double gn = norm2(g);
            if (gn <= 1e-13 * (1.0 + std::abs(fx))) break;
            std::vector<double> trial(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) trial[j] = x[j] - eta * g[j];
            const double ft = objective(trial, y, gmm, sigma, tau);
            if (ft <= fx) {
                x.swap(trial);
                fx = ft;
                eta = std::min(eta0, eta * 1.05);
            } else {
                eta *= 0.5;
                if (eta < 1e-16) break;
            }
        }
        bool dup = false;
        for (const auto& prev : found)
            if (norm2_diff(prev, x) < 1e-6 * (1.0 + norm2(x))) {
                dup = true;
                break;
            }
        if (!dup) {
            found.push_back(x);
            ref.basin_values.push_back(fx);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < ref.basin_values.size(); ++i)
        if (ref.basin_values[i] < ref.basin_values[best]) best = i;
    ref.x_star = found[best];
    ref.f_star = ref.basin_values[best];
    return ref;
}

CertificationReport certify_theorem1(const std::vector<double>& y, const priors::GmmPrior& gmm,
                                     double sigma, const priors::EpsilonSchedule& schedule,
                                     const CertifyConfig& cfg) {
    gmm.validate();
    cfg.solve.validate();
    if (!(cfg.b2_scale > 0.0)) throw ContractError("certify: b2_scale must be positive");

    const double L = 1.0;  // gradient of 0.5||x - y||^2 is 1-Lipschitz exactly
    const auto lip = estimate_lipschitz_M(gmm, sigma, cfg.solve.tau, -cfg.lipschitz_box,
                                          cfg.lipschitz_box, cfg.lipschitz_samples, cfg.seed);
    const double M = lip.inflated;
    if (cfg.solve.gamma > max_feasible_gamma(L, M))
        throw ContractError("certify: gamma exceeds the feasible step range");

    CertificationReport rep;
    rep.constants = compute_constants(cfg.solve.gamma, cfg.solve.tau, L, M);

    auto exact = priors::PriorHandle::make_gmm(gmm, sigma);
    auto wrapped = priors::PriorHandle::make_inexact(exact, schedule, cfg.seed);

    solver::SolveConfig scfg = cfg.solve;
    scfg.trace_level = solver::TraceLevel::full;  // shadow steps need the iterates
    const priors::Shape shape{static_cast<int>(y.size()), 1};
    const auto sol = solver::pr_sans_solve(y, wrapped, scfg, shape);
    const auto& tr = sol.trace;

    const auto ref = solve_reference_fstar(y, gmm, sigma, cfg.solve.tau);
    rep.f0 = tr.f0;
    rep.f_star = ref.f_star;
    rep.iterations = tr.iterations;

    const double gamma = cfg.solve.gamma, tau = cfg.solve.tau;
    const auto& c = rep.constants;
    const double descent_coef = (1.0 - gamma * c.M) / (2.0 * gamma);

    double grad_sq_sum = 0.0, eps_sq_sum = 0.0;
    double min_grad_sq = std::numeric_limits<double>::infinity();
    double prev_f = tr.f0;
    const std::vector<double>* prev_x = &y;

    for (int k = 1; k <= tr.iterations; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        const double eps = tr.epsilons[i];
        const double grad_sq = tr.grad_norms[i] * tr.grad_norms[i];
        grad_sq_sum += grad_sq;
        eps_sq_sum += eps * eps;
        min_grad_sq = std::min(min_grad_sq, grad_sq);

        const double lhs = grad_sq_sum / k;
        const double rhs =
            c.B1 / k * (rep.f0 - rep.f_star) + cfg.b2_scale * c.B2 * (eps_sq_sum / k);
        const bool ok = lhs <= rhs * (1.0 + cfg.rel_slack) + cfg.abs_floor;
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        rep.satisfied.push_back(ok);
        rep.min_grad_sq.push_back(min_grad_sq);
        if (!ok) rep.bound_violations.push_back(k);

        // Sufficient decrease with the inexactness allowance.
        const double step_sq = tr.step_norms[i] * tr.step_norms[i];
        const double f_k = tr.f_values[i];
        const double descent_rhs =
            prev_f - descent_coef * step_sq + c.lambda * c.alpha * c.alpha * eps * eps / 2.0;
        if (!(f_k <= descent_rhs + cfg.rel_slack * std::max(1.0, std::abs(prev_f)) +
                         cfg.abs_floor))
            rep.descent_violations.push_back(k);

        // Shadow step: rerun this step with the exact prior from the same
        // starting point and compare.
        {
            auto exact_step = exact;  // stateless copy
            const auto shadow = solver::pr_sans_step(*prev_x, y, exact_step, scfg, shape);
            const double dist = norm2_diff(tr.iterates[i], shadow);
            if (!(dist <= c.alpha * eps + cfg.shadow_slack)) rep.proximity_violations.push_back(k);
        }

        prev_f = tr.f_values[i];
        prev_x = &tr.iterates[i];
    }

    rep.gradient_floor = min_grad_sq;
    if (schedule.square_summable()) {
        rep.asymptote_checked = true;
        rep.asymptote_ok = min_grad_sq < cfg.asymptote_tol;
    }

    rep.passed = rep.bound_violations.empty() && rep.descent_violations.empty() &&
                 rep.proximity_violations.empty() && (!rep.asymptote_checked || rep.asymptote_ok);
    int first = 0;
    for (const auto* list : {&rep.bound_violations, &rep.descent_violations,
                             &rep.proximity_violations})
        if (!list->empty()) first = first == 0 ? list->front() : std::min(first, list->front());
    rep.first_violation = first;
    return rep;
}

void require_passed(const CertificationReport& report) {
    if (report.passed) return;
    std::ostringstream os;
    os << "certification failed:";
    if (!report.bound_violations.empty())
        os << " bound at t=" << report.bound_violations.front() << ";";
    if (!report.descent_violations.empty())
        os << " descent at k=" << report.descent_violations.front() << ";";
    if (!report.proximity_violations.empty())
        os << " proximity at k=" << report.proximity_violations.front() << ";";
    if (report.asymptote_checked && !report.asymptote_ok)
        os << " gradient floor " << report.gradient_floor << " above asymptote target;";
    throw CertificationError(report.first_violation, os.str());
}

std::string CertificationReport::to_csv() const {
    std::ostringstream os;
    os << "t,lhs,rhs,satisfied,min_grad_sq\n";
    for (int t = 1; t <= iterations; ++t) {
        const auto i = static_cast<std::size_t>(t - 1);
        os << t << "," << fmt_full(lhs[i]) << "," << fmt_full(rhs[i]) << ","
           << (satisfied[i] ? 1 : 0) << "," << fmt_full(min_grad_sq[i]) << "\n";
    }
    return os.str();
}

std::string CertificationReport::to_json() const {
    nlohmann::json j;
    j["constants"] = {{"gamma", constants.gamma},
                      {"tau", constants.tau},
                      {"L", constants.L},
                      {"M", constants.M},
                      {"lambda", constants.lambda},
                      {"alpha", constants.alpha},
                      {"alpha_statement", constants.alpha_statement},
                      {"B1", constants.B1},
                      {"B2", constants.B2}};
    j["f0"] = f0;
    j["f_star"] = f_star;
    j["iterations"] = iterations;
    j["lhs"] = lhs;
    j["rhs"] = rhs;
    j["min_grad_sq"] = min_grad_sq;
    j["bound_violations"] = bound_violations;
    j["descent_violations"] = descent_violations;
    j["proximity_violations"] = proximity_violations;
    j["asymptote_checked"] = asymptote_checked;
    j["asymptote_ok"] = asymptote_ok;
    j["gradient_floor"] = gradient_floor;
    j["passed"] = passed;
    j["first_violation"] = first_violation;
    return j.dump(2) + "\n";
}

}  // namespace prsans::theory
