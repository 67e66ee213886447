#include "cran/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "socp_builder.hpp"

namespace cran::baselines {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::pair<int, int>> links_by_norm(const BeamformerSet& w, bool descending) {
    std::vector<std::pair<int, int>> order;
    order.reserve(w.num_users * w.num_rrh);
    for (int k = 0; k < w.num_users; ++k)
        for (int n = 0; n < w.num_rrh; ++n) order.emplace_back(k, n);
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        const double na = w.link_block(a.first, a.second).norm();
        const double nb = w.link_block(b.first, b.second).norm();
        return descending ? na > nb : na < nb;
    });
    return order;
}

// Shared removal loop: from full cooperation, remove links in the given
// order (skipping removals that would empty a user row), re-solving after
// each removal; stops at the first infeasible solve and returns the
// minimum-power report visited.
SolveReport remove_links_in_order(const DesignProblem& prob,
                                  const std::vector<std::pair<int, int>>& ascending,
                                  SolveReport best, int* solves) {
    LinkMatrix links = LinkMatrix::full_cooperation(prob.num_users, prob.num_rrh);
    for (const auto& [k, n] : ascending) {
        int row_links = 0;
        for (int j = 0; j < prob.num_rrh; ++j) row_links += links.serves(k, j) ? 1 : 0;
        if (row_links <= 1) continue;
        links.entries(k, n) = 1;
        SolveReport rep = solve_p2(prob, links);
        ++(*solves);
        if (!rep.feasible) break;
        if (rep.p_total < best.p_total) best = std::move(rep);
    }
    return best;
}

}  // namespace

SolveReport run_full_cooperation(const DesignProblem& prob) {
    return solve_p2(prob, LinkMatrix::full_cooperation(prob.num_users, prob.num_rrh));
}

SolveReport run_ilr(const DesignProblem& prob) {
    const auto t0 = Clock::now();
    SolveReport full = run_full_cooperation(prob);
    int solves = 1;
    if (!full.feasible) {
        full.wall_time_s = seconds_since(t0);
        return full;
    }
    const auto ascending = links_by_norm(full.beamformers, /*descending=*/false);
    SolveReport best = remove_links_in_order(prob, ascending, std::move(full), &solves);
    best.convex_solves = solves;
    best.wall_time_s = seconds_since(t0);
    return best;
}

SolveReport run_es(const DesignProblem& prob) {
    const auto t0 = Clock::now();
    SolveReport best;
    best.p_total = std::numeric_limits<double>::infinity();
    int solves = 0;
    for_each_link_matrix(prob.num_users, prob.num_rrh, [&](const LinkMatrix& links) {
        SolveReport rep = solve_p2(prob, links);
        ++solves;
        if (rep.feasible && rep.p_total < best.p_total) best = std::move(rep);
    });
    if (!std::isfinite(best.p_total)) {
        best.feasible = false;
        best.p_total = 0.0;
        best.solver_status = conic::SolveStatus::PrimalInfeasible;
    }
    best.convex_solves = solves;
    best.wall_time_s = seconds_since(t0);
    return best;
}

namespace {

enum class SurrogateKind { LogRatio, Tangent };

double surrogate_value(const DesignProblem& prob, const BeamformerSet& w, double theta,
                       SurrogateKind kind) {
    const double c_theta = 1.0 / std::log1p(1.0 / theta);
    double val = prob.eps2 * w.w.squaredNorm();
    for (int k = 0; k < prob.num_users; ++k) {
        for (int n = 0; n < prob.num_rrh; ++n) {
            const double q = w.link_block(k, n).squaredNorm();
            if (kind == SurrogateKind::LogRatio) {
                val += prob.eps1 * prob.rate(k) * c_theta * std::log1p(q / theta);
            } else {
                val += prob.eps1 * prob.rate(k) * q / (q + theta);
            }
        }
    }
    return val;
}

SolveReport run_surrogate(const DesignProblem& prob, const SurrogateOptions& opts,
                          SurrogateKind kind, std::vector<double>* surrogate_trace) {
    const auto t0 = Clock::now();
    const int K = prob.num_users;
    const int N = prob.num_rrh;
    const double c_theta = 1.0 / std::log1p(1.0 / opts.theta);
    const LinkMatrix full = LinkMatrix::full_cooperation(K, N);

    SolveReport init = solve_p2(prob, full);
    int solves = 1;
    if (!init.feasible) {
        init.wall_time_s = seconds_since(t0);
        return init;
    }

    BeamformerSet w = init.beamformers;
    double p_prev = surrogate_value(prob, w, opts.theta, kind);
    if (surrogate_trace) surrogate_trace->push_back(p_prev);

    int iters = 0;
    for (int t = 1; t <= opts.t_max; ++t) {
        Eigen::MatrixXd weights(K, N);
        for (int k = 0; k < K; ++k) {
            for (int n = 0; n < N; ++n) {
                const double q = w.link_block(k, n).squaredNorm();
                double coef;
                if (kind == SurrogateKind::LogRatio) {
                    coef = prob.eps1 * prob.rate(k) * c_theta / (q + opts.theta);
                } else {
                    coef = prob.eps1 * prob.rate(k) * opts.theta /
                           ((q + opts.theta) * (q + opts.theta));
                }
                weights(k, n) = coef + prob.eps2;
            }
        }
        detail::BuiltSocp built =
            detail::build_socp(prob, full, detail::SocpObjective::WeightedSquares, &weights);
        conic::ConeSolution sol = conic::solve(built.prog);
        ++solves;
        if (sol.status != conic::SolveStatus::Optimal) break;
        w = built.decode(sol.x, prob);
        iters = t;
        const double p_now = surrogate_value(prob, w, opts.theta, kind);
        if (surrogate_trace) surrogate_trace->push_back(p_now);
        const bool done = std::abs(p_now - p_prev) / p_now < opts.delta;
        p_prev = p_now;
        if (done) break;
    }

    LinkMatrix links = links_from_beamformers(w, opts.kappa * prob.pt_watt);
    const auto priority = links_by_norm(w, /*descending=*/true);
    SolveReport rep = solve_with_repair(prob, links, priority, &solves);
    rep.convex_solves = solves;
    rep.surrogate_iters = iters;
    rep.wall_time_s = seconds_since(t0);
    return rep;
}

}  // namespace

SolveReport run_mm(const DesignProblem& prob, const SurrogateOptions& opts,
                   std::vector<double>* surrogate_trace) {
    return run_surrogate(prob, opts, SurrogateKind::LogRatio, surrogate_trace);
}

SolveReport run_sca(const DesignProblem& prob, const SurrogateOptions& opts,
                    std::vector<double>* surrogate_trace) {
    return run_surrogate(prob, opts, SurrogateKind::Tangent, surrogate_trace);
}

double gsb_objective(const DesignProblem& prob, const BeamformerSet& w) {
    double val = 0.0;
    for (int k = 0; k < prob.num_users; ++k) {
        for (int n = 0; n < prob.num_rrh; ++n) {
            val += 2.0 * std::sqrt(prob.eps1 * prob.eps2 * prob.rate(k)) *
                   w.link_block(k, n).norm();
        }
    }
    return val;
}

SolveReport run_gsb(const DesignProblem& prob) {
    const auto t0 = Clock::now();
    const int K = prob.num_users;
    const int N = prob.num_rrh;
    const int L = prob.num_antennas;
    const LinkMatrix full = LinkMatrix::full_cooperation(K, N);

    Eigen::MatrixXd weights(K, N);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n)
            weights(k, n) = 2.0 * std::sqrt(prob.eps1 * prob.eps2 * prob.rate(k));
    detail::BuiltSocp built =
        detail::build_socp(prob, full, detail::SocpObjective::WeightedNorms, &weights);
    conic::ConeSolution sol = conic::solve(built.prog);
    int solves = 1;
    if (sol.status != conic::SolveStatus::Optimal) {
        SolveReport rep;
        rep.solver_status = sol.status;
        rep.convex_solves = solves;
        rep.wall_time_s = seconds_since(t0);
        return rep;
    }
    const BeamformerSet w4 = built.decode(sol.x, prob);

    // Links ordered by channel-weighted beamformer norm, weakest first.
    std::vector<std::pair<int, int>> ascending;
    ascending.reserve(K * N);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) ascending.emplace_back(k, n);
    auto link_priority = [&](const std::pair<int, int>& kn) {
        return prob.h_hat[kn.first].segment(kn.second * L, L).norm() *
               w4.link_block(kn.first, kn.second).norm();
    };
    std::stable_sort(ascending.begin(), ascending.end(),
                     [&](const auto& a, const auto& b) { return link_priority(a) < link_priority(b); });

    SolveReport fullrep = solve_p2(prob, full);
    ++solves;
    if (!fullrep.feasible) {
        fullrep.convex_solves = solves;
        fullrep.wall_time_s = seconds_since(t0);
        return fullrep;
    }
    SolveReport best = remove_links_in_order(prob, ascending, std::move(fullrep), &solves);
    best.convex_solves = solves;
    best.wall_time_s = seconds_since(t0);
    return best;
}

}  // namespace cran::baselines
