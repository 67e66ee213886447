#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cran/conic.hpp"
#include "cran/model.hpp"

namespace cran {

// Binary cooperation pattern: entries(k, n) == 0 means RRH n carries user
// k's stream. A valid matrix has at least one 0 in every user row.
struct LinkMatrix {
    Eigen::MatrixXi entries;  // K x N in {0, 1}

    static LinkMatrix full_cooperation(int num_users, int num_rrh) {
        return {Eigen::MatrixXi::Zero(num_users, num_rrh)};
    }
    int num_users() const { return static_cast<int>(entries.rows()); }
    int num_rrh() const { return static_cast<int>(entries.cols()); }
    bool serves(int k, int n) const { return entries(k, n) == 0; }
    bool valid() const;              // every user served by at least one RRH
    int active_link_count() const;   // number of zeros
    bool operator==(const LinkMatrix& other) const { return entries == other.entries; }
};

// Stacked beamformer, user-major then RRH then antenna.
struct BeamformerSet {
    int num_users = 0;
    int num_rrh = 0;
    int num_antennas = 0;
    Eigen::VectorXcd w;  // length K*N*L

    auto user_block(int k) {
        return w.segment(k * num_rrh * num_antennas, num_rrh * num_antennas);
    }
    auto user_block(int k) const {
        return w.segment(k * num_rrh * num_antennas, num_rrh * num_antennas);
    }
    auto link_block(int k, int n) {
        return w.segment((k * num_rrh + n) * num_antennas, num_antennas);
    }
    auto link_block(int k, int n) const {
        return w.segment((k * num_rrh + n) * num_antennas, num_antennas);
    }
};

struct SolveReport {
    bool feasible = false;
    double p_total = 0.0;
    double p_cp = 0.0;
    double p_rrh = 0.0;
    Eigen::VectorXd p_per_rrh;  // N transmit powers, before the eps2 factor
    Eigen::VectorXd sinr;       // K linear values
    LinkMatrix links;
    BeamformerSet beamformers;
    int convex_solves = 0;
    int gradient_iters = 0;
    int surrogate_iters = 0;
    double wall_time_s = 0.0;
    conic::SolveStatus solver_status = conic::SolveStatus::NumericalFailure;
};

// Rank-1 evaluation of the per-user SINR under imperfect CSI.
double sinr(const DesignProblem& prob, const BeamformerSet& w, int k);

// Signed SINR-constraint margin; zero exactly when sinr(k) equals gamma_k.
double rho(const DesignProblem& prob, const BeamformerSet& w, int k);

// Power accounting for a given beamformer and cooperation pattern. Throws
// std::invalid_argument when some w_kn is nonzero on a removed link.
SolveReport power_report(const DesignProblem& prob, const BeamformerSet& w,
                         const LinkMatrix& links);

// Minimum radiated power for a fixed cooperation pattern, solved as a
// second-order cone program over the beamformer stack with removed links
// eliminated from the variable set. feasible == false carries the solver
// certificate status.
SolveReport solve_p2(const DesignProblem& prob, const LinkMatrix& links);

// Threshold rule: link removed when its beamformer norm is below threshold.
// May produce rows with no active link; callers repair.
LinkMatrix links_from_beamformers(const BeamformerSet& w, double threshold);

// (2^N - 1)^K, saturating at 2^63-1.
std::uint64_t link_matrix_count(int num_users, int num_rrh);

// Enumerates every valid link matrix. Throws std::invalid_argument when the
// count exceeds the guard of 10^6.
void for_each_link_matrix(int num_users, int num_rrh,
                          const std::function<void(const LinkMatrix&)>& fn);

// Solves for `links`; while infeasible, restores the highest-priority removed
// link and re-solves. Rows left with no active link are repaired up front.
// priority_desc lists (k, n) pairs, most important first.
SolveReport solve_with_repair(const DesignProblem& prob, LinkMatrix links,
                              const std::vector<std::pair<int, int>>& priority_desc,
                              int* convex_solves);

}  // namespace cran
