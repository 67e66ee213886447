#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cran/model.hpp"

namespace cran {

// Largest eigenvalue of a Hermitian matrix via cyclic Jacobi sweeps on the
// real symmetric embedding. The input is symmetrized first.
double eigmax(const Eigen::MatrixXcd& m);

struct PerUserBound {
    double power = 0.0;            // minimum total power attributable to the user
    std::uint32_t subset_mask = 0; // RRH index set achieving it (bit n = RRH n)
    bool feasible = false;         // some subset has positive eigenvalue margin
};

struct BoundReport {
    double p_lower = 0.0;
    double p_upper = 0.0;
    std::vector<PerUserBound> per_user;
    bool infeasible_flag = false;
};

// Eigenvalue margin of user k under full cooperation; a positive value is
// necessary for any feasible design.
double user_eigen_margin(const DesignProblem& prob, int k);

// Per-user minimum over all nonempty RRH subsets of fronthaul plus radiated
// power. Guarded at N <= 20.
BoundReport lower_bound(const DesignProblem& prob);

// Closed form: full-cooperation fronthaul plus all RRHs at the transmit cap.
double upper_bound(const DesignProblem& prob);

BoundReport power_bounds(const DesignProblem& prob);

}  // namespace cran
