#pragma once

// Internal: assembles the second-order cone programs shared by the fixed-
// pattern radiated-power solve and the sparse-surrogate solves. Removed
// links never enter the variable vector, so their beamformers are exactly
// zero by construction.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "cran/conic.hpp"
#include "cran/core.hpp"
#include "cran/model.hpp"

namespace cran::detail {

enum class SocpObjective {
    RadiatedEpigraph,  // minimize t >= ||w||, beamformers live in the epigraph cone
    WeightedSquares,   // minimize sum_kn weight(k,n) * ||w_kn||^2 via rotated cones
    WeightedNorms,     // minimize sum_kn weight(k,n) * ||w_kn|| via per-link cones
};

struct BuiltSocp {
    conic::ConeProgram prog;
    // Real embedding of the active beamformer coordinates: active complex
    // coordinate i (in the order of `active`) maps to x entries
    // (x_index[2i], x_index[2i+1]) scaled by `scale`.
    std::vector<int> active;  // complex stack coordinates kept (sorted)
    std::vector<int> x_index; // 2 * active.size() positions into x
    double scale = 1.0;

    BeamformerSet decode(const Eigen::VectorXd& x, const DesignProblem& prob) const {
        BeamformerSet bf;
        bf.num_users = prob.num_users;
        bf.num_rrh = prob.num_rrh;
        bf.num_antennas = prob.num_antennas;
        bf.w = Eigen::VectorXcd::Zero(prob.num_users * prob.stack_dim());
        for (std::size_t i = 0; i < active.size(); ++i) {
            bf.w(active[i]) = std::complex<double>(scale * x(x_index[2 * i]),
                                                   scale * x(x_index[2 * i + 1]));
        }
        return bf;
    }
};

// weights is ignored for RadiatedEpigraph; for the other objectives it gives
// the per-link coefficient (K x N, entries on removed links ignored).
BuiltSocp build_socp(const DesignProblem& prob, const LinkMatrix& links, SocpObjective objective,
                     const Eigen::MatrixXd* weights = nullptr);

}  // namespace cran::detail
