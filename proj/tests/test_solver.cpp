#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "prsans/errors.hpp"
#include "prsans/nn/net.hpp"
#include "prsans/priors/epsilon_schedule.hpp"
#include "prsans/priors/gmm_prior.hpp"
#include "prsans/priors/prior_handle.hpp"
#include "prsans/rng.hpp"
#include "prsans/solver/pnp.hpp"

using namespace prsans;
using priors::EpsilonSchedule;
using priors::GmmPrior;
using priors::PriorHandle;
using priors::Shape;
using solver::SolveConfig;
using solver::TraceLevel;

namespace {

GmmPrior single_gaussian(double mean, double variance, std::size_t dim = 1) {
    GmmPrior gmm;
    gmm.components.push_back({1.0, std::vector<double>(dim, mean), variance});
    return gmm;
}

GmmPrior mixture_2d() {
    GmmPrior gmm;
    gmm.components.push_back({0.5, {1.0, 0.0}, 0.6});
    gmm.components.push_back({0.3, {0.0, 1.2}, 0.5});
    gmm.components.push_back({0.2, {-0.8, -0.5}, 0.8});
    return gmm;
}

}  // namespace

TEST_CASE("data-fidelity prox matches hand-computed values") {
    auto p1 = solver::prox_data_fidelity({2.0}, {0.0}, 1.0);
    CHECK(p1[0] == doctest::Approx(1.0).epsilon(1e-15));
    auto p2 = solver::prox_data_fidelity({0.0}, {1.0}, 0.7);
    CHECK(p2[0] == doctest::Approx(0.7 / 1.7).epsilon(1e-14));

    // v = y is already the minimizer; gamma = 1 makes the arithmetic exact
    std::vector<double> y{0.3, -1.7, 2.5};
    auto p3 = solver::prox_data_fidelity(y, y, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(p3[i] == y[i]);

    CHECK_THROWS_AS(solver::prox_data_fidelity({1.0}, {1.0, 2.0}, 0.5), ContractError);
    CHECK_THROWS_AS(solver::prox_data_fidelity({1.0}, {1.0}, 0.0), ContractError);
    CHECK_THROWS_AS(solver::prox_data_fidelity({1.0}, {1.0}, -1.0), ContractError);
}

TEST_CASE("one step of the iteration matches the worked scalar example") {
    // unit-variance prior at 0, unit noise: denoiser halves the input;
    // gamma 0.5, tau 1, x_prev = y = 1 gives prox(0.75, 1, 0.5) = 5/6
    auto prior = PriorHandle::make_gmm(single_gaussian(0.0, 1.0), 1.0);
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 1.0;
    auto x = solver::pr_sans_step({1.0}, {1.0}, prior, cfg, {1, 1});
    CHECK(x[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
    CHECK(prior.calls_made() == 0);  // only the inexact wrapper counts calls

    CHECK_THROWS_AS(solver::pr_sans_step({1.0, 2.0}, {1.0}, prior, cfg, {1, 1}), ContractError);
}

TEST_CASE("scalar fixed point is gamma-independent") {
    // stationarity of 0.5(x-1)^2 + h(x) with h'(x) = x/2 gives x* = 2/3
    std::vector<double> y{1.0};
    for (double gamma : {0.1, 0.5, 0.9}) {
        auto prior = PriorHandle::make_gmm(single_gaussian(0.0, 1.0), 1.0);
        SolveConfig cfg;
        cfg.gamma = gamma;
        cfg.tau = 1.0;
        cfg.max_iter = 400;
        cfg.fp_tol = 1e-14;
        auto res = solver::pr_sans_solve(y, prior, cfg, {1, 1});
        CHECK(res.x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
        CHECK(solver::fixed_point_residual(res.x, y, prior, cfg, {1, 1}) < 1e-12);
    }
}

TEST_CASE("quadratic prior solves to the closed-form shrinkage of y") {
    // single zero-mean Gaussian: x* = y / (1 + tau sigma^2 / (s^2 + sigma^2))
    const double s2 = 0.5, sigma = 0.5, tau = 1.3;
    std::vector<double> y{2.0, -1.0, 0.25};
    auto prior = PriorHandle::make_gmm(single_gaussian(0.0, s2, 3), sigma);
    SolveConfig cfg;
    cfg.gamma = 0.6;
    cfg.tau = tau;
    cfg.max_iter = 500;
    cfg.fp_tol = 1e-15;
    auto res = solver::pr_sans_solve(y, prior, cfg, {3, 1});
    const double shrink = 1.0 / (1.0 + tau * sigma * sigma / (s2 + sigma * sigma));
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(res.x[i] == doctest::Approx(y[i] * shrink).epsilon(1e-10));
}

TEST_CASE("identity denoiser leaves the data fixed and stops immediately") {
    // zero-parameter learned net is the exact identity, so the residual
    // vanishes and with gamma = 1 the prox returns y bitwise
    nn::NetArch arch{2, 3, 3, nn::PaddingMode::symmetric};
    auto net = std::make_shared<nn::ResidualDenoiser>(nn::ResidualDenoiser::zeros(arch));
    auto prior = PriorHandle::make_learned(net);

    std::vector<double> y(24);
    Rng rng(5);
    for (auto& v : y) v = rng.normal();

    SolveConfig cfg;
    cfg.gamma = 1.0;
    cfg.tau = 0.8;
    cfg.max_iter = 50;
    cfg.fp_tol = 1e-12;
    auto res = solver::pr_sans_solve(y, prior, cfg, {6, 4});
    CHECK(res.trace.iterations == 1);
    CHECK(res.trace.step_norms[0] == 0.0);
    CHECK(res.trace.fixed_point_residuals[0] == 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(res.x[i] == y[i]);
    CHECK(res.trace.f_values.empty());
    CHECK(std::isnan(res.trace.f0));
}

TEST_CASE("vanishing regularization weight returns essentially the data") {
    auto prior = PriorHandle::make_gmm(single_gaussian(3.0, 0.4, 3), 0.7);
    std::vector<double> y{0.2, -0.9, 1.4};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 1e-12;
    cfg.max_iter = 300;
    cfg.fp_tol = 1e-16;
    auto res = solver::pr_sans_solve(y, prior, cfg, {3, 1});
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(std::abs(res.x[i] - y[i]) < 1e-10);
}

TEST_CASE("multimodal 2-D fixed point agrees with a brute-force minimizer") {
    auto gmm = mixture_2d();
    const double sigma = 0.4, tau = 0.8;
    std::vector<double> y{0.6, 0.2};
    auto prior = PriorHandle::make_gmm(gmm, sigma);
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = tau;
    cfg.max_iter = 3000;
    cfg.fp_tol = 1e-14;
    auto res = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    REQUIRE(solver::fixed_point_residual(res.x, y, prior, cfg, {2, 1}) < 1e-12);

    auto objective = [&](const std::vector<double>& x) {
        return oracle::gmm_objective(gmm, x, y, sigma, tau);
    };
    auto xstar = oracle::grid_minimize_2d(objective, -3.0, 3.0, 80);
    CHECK(std::abs(res.x[0] - xstar[0]) < 1e-5);
    CHECK(std::abs(res.x[1] - xstar[1]) < 1e-5);
}

TEST_CASE("start point overrides and validation") {
    auto prior = PriorHandle::make_gmm(single_gaussian(0.0, 1.0), 1.0);
    std::vector<double> y{1.0};
    SolveConfig cfg;
    cfg.gamma = 0.4;
    cfg.max_iter = 200;
    cfg.fp_tol = 1e-14;

    std::vector<double> x0{-5.0};
    auto from_x0 = solver::pr_sans_solve(y, prior, cfg, {1, 1}, &x0);
    auto from_y = solver::pr_sans_solve(y, prior, cfg, {1, 1});
    CHECK(from_x0.x[0] == doctest::Approx(from_y.x[0]).epsilon(1e-10));
    CHECK(from_x0.trace.step_norms[0] > from_y.trace.step_norms[0]);

    std::vector<double> bad_shape{1.0, 2.0};
    CHECK_THROWS_AS(solver::pr_sans_solve(y, prior, cfg, {1, 1}, &bad_shape), ContractError);
    std::vector<double> bad_val{std::nan("")};
    CHECK_THROWS_AS(solver::pr_sans_solve(y, prior, cfg, {1, 1}, &bad_val), ContractError);
    CHECK_THROWS_AS(solver::pr_sans_solve(bad_val, prior, cfg, {1, 1}), ContractError);

    SolveConfig bad_cfg = cfg;
    bad_cfg.gamma = 0.0;
    CHECK_THROWS_AS(solver::pr_sans_solve(y, prior, bad_cfg, {1, 1}), ContractError);
    bad_cfg = cfg;
    bad_cfg.max_iter = 0;
    CHECK_THROWS_AS(solver::pr_sans_solve(y, prior, bad_cfg, {1, 1}), ContractError);
}

TEST_CASE("objective decreases monotonically and the gradient flattens out") {
    auto gmm = mixture_2d();
    auto prior = PriorHandle::make_gmm(gmm, 0.4);
    std::vector<double> y{0.6, 0.2};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.8;
    cfg.max_iter = 500;
    auto res = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    const auto& tr = res.trace;
    REQUIRE(tr.f_values.size() == 500);

    CHECK(tr.f0 == doctest::Approx(oracle::gmm_objective(gmm, y, y, 0.4, 0.8)).epsilon(1e-10));
    double prev = tr.f0;
    for (double f : tr.f_values) {
        CHECK(f <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
        prev = f;
    }
    double min_grad = *std::min_element(tr.grad_norms.begin(), tr.grad_norms.end());
    CHECK(min_grad * min_grad < 1e-8);
}

TEST_CASE("constant injected error keeps the gradient away from zero") {
    auto gmm = mixture_2d();
    auto base = PriorHandle::make_gmm(gmm, 0.4);
    auto prior =
        PriorHandle::make_inexact(std::move(base), EpsilonSchedule::parse("const:0.1"), 99);
    std::vector<double> y{0.6, 0.2};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.8;
    cfg.max_iter = 500;
    auto res = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    const auto& tr = res.trace;
    REQUIRE(tr.grad_norms.size() == 500);
    for (double e : tr.epsilons) CHECK(e == 0.1);
    double min_grad = *std::min_element(tr.grad_norms.begin(), tr.grad_norms.end());
    CHECK(min_grad > 1e-4);
}

TEST_CASE("affine contraction matches the spectral prediction") {
    // single-Gaussian denoiser is affine, so the iteration map is affine
    // with slope (1 - gamma tau (1 - a)) / (1 + gamma), a = s^2/(s^2+sigma^2)
    const double s2 = 0.5, sigma = 0.5, tau = 1.0, gamma = 0.5;
    const double a = s2 / (s2 + sigma * sigma);
    const double slope = (1.0 - gamma * tau * (1.0 - a)) / (1.0 + gamma);

    auto prior = PriorHandle::make_gmm(single_gaussian(1.0, s2), sigma);
    SolveConfig cfg;
    cfg.gamma = gamma;
    cfg.tau = tau;
    cfg.max_iter = 12;
    auto res = solver::pr_sans_solve({2.0}, prior, cfg, {1, 1});
    const auto& sn = res.trace.step_norms;
    for (std::size_t k = 2; k + 1 < sn.size(); ++k)
        CHECK(sn[k + 1] / sn[k] == doctest::Approx(std::abs(slope)).epsilon(1e-6));

    // the affine fixed point (tau b + y) / (1 + tau (1 - a)), b = (1-a) mu
    const double b = (1.0 - a) * 1.0;
    const double xstar = (tau * b + 2.0) / (1.0 + tau * (1.0 - a));
    cfg.max_iter = 200;
    cfg.fp_tol = 1e-15;
    auto tight = solver::pr_sans_solve({2.0}, prior, cfg, {1, 1});
    CHECK(tight.x[0] == doctest::Approx(xstar).epsilon(1e-12));
}

TEST_CASE("numeric blow-up raises a divergence error naming the iteration") {
    nn::NetArch arch{1, 1, 1, nn::PaddingMode::symmetric};

    auto immediate = nn::ResidualDenoiser::zeros(arch);
    immediate.layers[0].w[0] = 1e308;
    auto p1 = PriorHandle::make_learned(std::make_shared<nn::ResidualDenoiser>(immediate));
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.max_iter = 10;
    CHECK_THROWS_WITH_AS(solver::pr_sans_solve({10.0}, p1, cfg, {1, 1}),
                         "solver diverged at iteration 1", DivergenceError);

    auto delayed = nn::ResidualDenoiser::zeros(arch);
    delayed.layers[0].w[0] = 1e200;
    auto p2 = PriorHandle::make_learned(std::make_shared<nn::ResidualDenoiser>(delayed));
    try {
        solver::pr_sans_solve({10.0}, p2, cfg, {1, 1});
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration() == 2);
    }
}

TEST_CASE("trace level changes bookkeeping but never the answer") {
    auto gmm = mixture_2d();
    std::vector<double> y{0.6, 0.2};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.8;
    cfg.max_iter = 40;

    std::vector<std::vector<double>> finals;
    for (auto level : {TraceLevel::final, TraceLevel::norms, TraceLevel::full}) {
        auto prior = PriorHandle::make_gmm(gmm, 0.4);
        SolveConfig c = cfg;
        c.trace_level = level;
        auto res = solver::pr_sans_solve(y, prior, c, {2, 1});
        finals.push_back(res.x);
        if (level == TraceLevel::full) {
            REQUIRE(res.trace.iterates.size() == 40);
            CHECK(res.trace.iterates.back() == res.x);
        } else {
            CHECK(res.trace.iterates.empty());
        }
        CHECK(res.trace.step_norms.size() == 40);
        CHECK(res.trace.epsilons.size() == 40);
    }
    CHECK(finals[0] == finals[1]);
    CHECK(finals[1] == finals[2]);
}

TEST_CASE("trace residuals shift the step norms and end with a probe step") {
    auto gmm = mixture_2d();
    auto prior = PriorHandle::make_gmm(gmm, 0.4);
    std::vector<double> y{0.6, 0.2};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.8;
    cfg.max_iter = 25;
    cfg.trace_level = TraceLevel::full;
    auto res = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    const auto& tr = res.trace;
    REQUIRE(tr.iterations == 25);
    REQUIRE(tr.fixed_point_residuals.size() == 25);

    for (int k = 0; k + 1 < 25; ++k)
        CHECK(tr.fixed_point_residuals[static_cast<std::size_t>(k)] ==
              tr.step_norms[static_cast<std::size_t>(k + 1)]);

    // recomputing the residual at any stored iterate reproduces the trace
    for (int k : {0, 7, 24}) {
        double r = solver::fixed_point_residual(tr.iterates[static_cast<std::size_t>(k)], y, prior,
                                                cfg, {2, 1});
        CHECK(r == tr.fixed_point_residuals[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("the solver advances a private copy of the wrapper counter") {
    auto base = PriorHandle::make_gmm(mixture_2d(), 0.4);
    auto prior = PriorHandle::make_inexact(std::move(base),
                                           EpsilonSchedule::parse("list:0.3,0.2,0.1,0.05,0.02"), 7);
    std::vector<double> y{0.6, 0.2};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.8;
    cfg.max_iter = 3;

    auto r1 = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    CHECK(prior.calls_made() == 0);  // caller's handle untouched
    CHECK(r1.trace.epsilons == std::vector<double>{0.3, 0.2, 0.1});

    auto r2 = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    CHECK(r1.x == r2.x);  // bitwise repeat because the counter never moved
    CHECK(r1.trace.step_norms == r2.trace.step_norms);
    CHECK(r1.trace.fixed_point_residuals == r2.trace.fixed_point_residuals);

    // a pre-advanced caller handle starts the schedule where it stands
    prior.apply(y, {2, 1});
    CHECK(prior.calls_made() == 1);
    auto r3 = solver::pr_sans_solve(y, prior, cfg, {2, 1});
    CHECK(r3.trace.epsilons == std::vector<double>{0.2, 0.1, 0.05});
}

TEST_CASE("trace serializes with empty objective columns for opaque priors") {
    std::vector<double> y{0.6, 0.2};
    SolveConfig cfg;
    cfg.gamma = 0.5;
    cfg.tau = 0.8;
    cfg.max_iter = 5;

    auto gp = PriorHandle::make_gmm(mixture_2d(), 0.4);
    auto with_f = solver::pr_sans_solve(y, gp, cfg, {2, 1});
    std::istringstream g(with_f.trace.to_csv());
    std::string line;
    std::getline(g, line);
    CHECK(line == "k,f,grad_norm,step_norm,epsilon,fp_residual");
    int rows = 0;
    while (std::getline(g, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        CHECK(std::stoi(cell) == rows);
        std::getline(cells, cell, ',');
        CHECK(std::stod(cell) ==
              with_f.trace.f_values[static_cast<std::size_t>(rows - 1)]);  // full round trip
    }
    CHECK(rows == 5);

    priors::TvOptions tv;
    tv.strength = 0.1;
    auto tp = PriorHandle::make_tv(tv);
    auto no_f = solver::pr_sans_solve(y, tp, cfg, {2, 1});
    std::istringstream t(no_f.trace.to_csv());
    std::getline(t, line);
    std::getline(t, line);
    CHECK(line.substr(0, 3) == "1,,");  // objective columns stay empty
    CHECK(no_f.trace.f_values.empty());
}
