#pragma once

#include <vector>

#include "cran/core.hpp"
#include "cran/model.hpp"

namespace cran::baselines {

// Reweighting loop constants shared by the two sparse-surrogate methods.
struct SurrogateOptions {
    double theta = 1e-5;   // smoothing of the link indicator
    int t_max = 1000;      // outer iteration cap
    double delta = 1e-5;   // relative termination threshold
    double kappa = 1e-3;   // link threshold factor (times P_t)
};

// Full-cooperation solve; its feasibility defines problem feasibility.
SolveReport run_full_cooperation(const DesignProblem& prob);

// Iterative link removal: priorities from the full-cooperation beamformer
// norms, links removed in ascending order until the first infeasible solve;
// returns the minimum-power configuration visited.
SolveReport run_ilr(const DesignProblem& prob);

// Exhaustive search over all (2^N - 1)^K cooperation patterns; the optimum.
SolveReport run_es(const DesignProblem& prob);

// Reweighted linearization of the log-based link indicator: each outer
// iteration solves a convex problem with per-link weights from the previous
// iterate, then thresholds and repairs. surrogate_trace, when given, records
// the monotone surrogate objective per iteration (initial point included).
SolveReport run_mm(const DesignProblem& prob, const SurrogateOptions& opts = {},
                   std::vector<double>* surrogate_trace = nullptr);

// First-order surrogate of the ratio-based link indicator; same skeleton as
// run_mm with tangent weights.
SolveReport run_sca(const DesignProblem& prob, const SurrogateOptions& opts = {},
                    std::vector<double>* surrogate_trace = nullptr);

// Group-sparse initialization: one mixed-norm convex solve prioritizes the
// links, then removal proceeds as in run_ilr.
SolveReport run_gsb(const DesignProblem& prob);

// Weighted mixed-norm objective value used by run_gsb's initial solve.
double gsb_objective(const DesignProblem& prob, const BeamformerSet& w);

}  // namespace cran::baselines
