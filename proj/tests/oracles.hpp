#pragma once

#include <functional>
#include <vector>

#include "prsans/priors/gmm_prior.hpp"

// Independent reference implementations used only by tests. Each one is
// written the straightforward way (dense sums, no log-space tricks, no
// shared helpers with the library) so agreement is meaningful.
namespace oracle {

using ScalarFn = std::function<double(const std::vector<double>&)>;

// Central-difference gradient with per-coordinate step h.
std::vector<double> fd_gradient(const ScalarFn& f, const std::vector<double>& x, double h);

// Adaptive Simpson quadrature to absolute tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b, double tol);

// Bisection root of f on [lo, hi]; the endpoints must bracket a sign
// change.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

// Mixture marginal after adding N(0, sigma^2 I) noise, evaluated as a
// plain sum of component Gaussians.
double gmm_marginal_density(const prsans::priors::GmmPrior& gmm, const std::vector<double>& z,
                            double sigma);

// 0.5 ||x - y||^2 - tau sigma^2 log p_z(x) through the naive density.
double gmm_objective(const prsans::priors::GmmPrior& gmm, const std::vector<double>& x,
                     const std::vector<double>& y, double sigma, double tau);

// Backtracking finite-difference descent; returns the local minimizer
// reached from x0.
std::vector<double> descend(const ScalarFn& f, std::vector<double> x0, int max_iter = 5000,
                            double grad_tol = 1e-10);

// Dense grid search over [lo, hi]^2 followed by a descent polish.
std::vector<double> grid_minimize_2d(const ScalarFn& f, double lo, double hi, int n_per_axis);

// Exact 1-D total-variation denoiser (forward differences) by coordinate
// descent on the box-constrained dual, run to machine precision.
std::vector<double> tv1d_exact(const std::vector<double>& z, double lambda);

// Anisotropic forward-difference TV with replicated boundary; the value
// the 2-D denoiser penalizes.
double tv_value(const std::vector<double>& x, int width, int height);

// Direct 2-D Gaussian convolution with a dense kernel and symmetric
// boundary reflection.
std::vector<double> gaussian_blur_dense(const std::vector<double>& img, int width, int height,
                                        double sigma);

}  // namespace oracle
