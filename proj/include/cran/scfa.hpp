#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cran/core.hpp"
#include "cran/model.hpp"

namespace cran::scfa {

struct Config {
    double mu1 = 1e-4;        // first gradient step
    int t_max = 100000;       // gradient iteration cap
    double tau = 1e-6;        // annealing trigger on |dQ| relative to a
    double xi = 0.1;          // annealing factor
    double q_t = 1e-6;        // termination threshold over the window
    double kappa = 1e-2;      // link threshold factor (times P_t)
    int delta_win = 5;        // termination window length
    double eta1 = 0.0;        // penalty weights; <= 0 means (eps1 + eps2) / 2
    double eta2 = 0.0;
    double a0 = 1.0;          // initial smoothing parameter
    double exp_clamp = 60.0;  // cap on positive exponent arguments
};

struct Trace {
    std::vector<double> q;
    std::vector<double> a;
    std::vector<double> step;
    std::vector<double> grad_norm;
};

// Smooth constraint-free surrogate of the total power: exponential smoothing
// of the fronthaul link indicator plus exponential penalties replacing the
// per-RRH power and SINR constraints. Positive exponent arguments are capped
// at exp_clamp before exponentiation.
double smooth_objective(const DesignProblem& prob, const BeamformerSet& w, double a,
                        const Config& cfg);

// Conjugate-coordinate gradient g of the surrogate: Q(w - mu g) decreases to
// first order. The per-user quadratic forms are applied blockwise; no
// KNL x KNL matrix is ever materialized.
Eigen::VectorXcd gradient(const DesignProblem& prob, const BeamformerSet& w, double a,
                          const Config& cfg);

// Barzilai-Borwein step from successive gradients and iterates. Falls back
// to `fallback` when the quotient is non-finite, nonpositive, or its
// denominator underflows.
double bb_step(const Eigen::VectorXcd& grad_now, const Eigen::VectorXcd& grad_prev,
               const Eigen::VectorXcd& w_now, const Eigen::VectorXcd& w_prev, double fallback);

// Full pipeline: full-cooperation initialization, annealed gradient descent,
// link thresholding, and feasibility repair through convex re-solves. The
// returned report always comes from a certified convex solve.
SolveReport run(const DesignProblem& prob, const Config& cfg = {}, Trace* trace = nullptr);

}  // namespace cran::scfa
