#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

namespace cran::conic {

enum class ConeType { NonNeg, SecondOrder };

struct ConeBlock {
    ConeType type;
    int dim;
};

// Standard-form cone program:
//
//   minimize    c' x
//   subject to  A x = b,  x in K
//
// where K is the ordered product of the blocks in `cones` over the
// coordinates of x. A SecondOrder block of dimension d constrains
// x_0 >= ||x_{1..d-1}||; the leading entry is the cone head.
struct ConeProgram {
    Eigen::VectorXd objective;              // c
    Eigen::SparseMatrix<double> eq_matrix;  // A
    Eigen::VectorXd eq_rhs;                 // b
    std::vector<ConeBlock> cones;

    Eigen::Index num_vars() const { return objective.size(); }
    Eigen::Index num_rows() const { return eq_rhs.size(); }

    // Throws std::invalid_argument on malformed dimensions or empty cones.
    void validate() const;
};

enum class SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalFailure,
};

const char* to_string(SolveStatus s);

// For Optimal: (x, y, s) is a primal-dual pair with duality gap below
// tolerance. For PrimalInfeasible: y is a Farkas certificate normalized to
// b'y = 1 with -A'y = s in the dual cone. For DualInfeasible: x is an
// unbounded ray normalized to c'x = -1 with A x = 0, x in K.
struct ConeSolution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    Eigen::VectorXd s;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    int iterations = 0;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double step_fraction = 0.99;  // fraction-to-boundary
};

// Homogeneous self-dual path-following with Nesterov-Todd scaling and a
// Mehrotra predictor-corrector. Deterministic for fixed inputs.
ConeSolution solve(const ConeProgram& prog, const SolverOptions& opts = {});

}  // namespace cran::conic
