#include "cran/core.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "socp_builder.hpp"

namespace cran {

bool LinkMatrix::valid() const {
    for (int k = 0; k < num_users(); ++k) {
        if (entries.row(k).minCoeff() != 0) return false;
    }
    return true;
}

int LinkMatrix::active_link_count() const {
    return static_cast<int>(entries.size()) - entries.sum();
}

double sinr(const DesignProblem& prob, const BeamformerSet& w, int k) {
    const Eigen::VectorXcd& hk = prob.h_hat[k];
    const Eigen::VectorXd& dk = prob.d_diag[k];
    double denom = prob.sigma_sq(k);
    double num = 0.0;
    for (int l = 0; l < prob.num_users; ++l) {
        const auto wl = w.user_block(l);
        const std::complex<double> prod = hk.dot(wl);  // conjugated dot
        const double mismatch = dk.cwiseProduct(wl.cwiseAbs2()).sum();
        if (l == k) {
            num = std::norm(prod);
            denom += mismatch;
        } else {
            denom += std::norm(prod) + mismatch;
        }
    }
    return num / denom;
}

double rho(const DesignProblem& prob, const BeamformerSet& w, int k) {
    const Eigen::VectorXcd& hk = prob.h_hat[k];
    const Eigen::VectorXd& dk = prob.d_diag[k];
    const double g = prob.gamma(k);
    double val = -g * prob.sigma_sq(k);
    for (int l = 0; l < prob.num_users; ++l) {
        const auto wl = w.user_block(l);
        const double prod_sq = std::norm(hk.dot(wl));
        const double mismatch = dk.cwiseProduct(wl.cwiseAbs2()).sum();
        if (l == k) {
            val += prod_sq - g * mismatch;
        } else {
            val -= g * (prod_sq + mismatch);
        }
    }
    return val;
}

SolveReport power_report(const DesignProblem& prob, const BeamformerSet& w,
                         const LinkMatrix& links) {
    constexpr double kZeroTol = 1e-9;
    SolveReport rep;
    rep.links = links;
    rep.beamformers = w;
    rep.p_per_rrh = Eigen::VectorXd::Zero(prob.num_rrh);
    rep.sinr.resize(prob.num_users);
    double cp = 0.0;
    for (int k = 0; k < prob.num_users; ++k) {
        for (int n = 0; n < prob.num_rrh; ++n) {
            const double norm_kn = w.link_block(k, n).norm();
            if (!links.serves(k, n) && norm_kn > kZeroTol) {
                std::ostringstream msg;
                msg << "beamformer nonzero on removed link (k=" << k << ", n=" << n
                    << "), |w|=" << norm_kn;
                throw std::invalid_argument(msg.str());
            }
            rep.p_per_rrh(n) += norm_kn * norm_kn;
            if (links.serves(k, n)) cp += prob.eps1 * prob.rate(k);
        }
        rep.sinr(k) = sinr(prob, w, k);
    }
    rep.p_cp = cp;
    rep.p_rrh = prob.eps2 * rep.p_per_rrh.sum();
    rep.p_total = rep.p_cp + rep.p_rrh;
    rep.feasible = true;
    rep.solver_status = conic::SolveStatus::Optimal;
    return rep;
}

SolveReport solve_p2(const DesignProblem& prob, const LinkMatrix& links) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::BuiltSocp built =
        detail::build_socp(prob, links, detail::SocpObjective::RadiatedEpigraph);
    conic::ConeSolution sol = conic::solve(built.prog);

    SolveReport rep;
    rep.solver_status = sol.status;
    rep.convex_solves = 1;
    rep.links = links;
    if (sol.status == conic::SolveStatus::Optimal) {
        BeamformerSet w = built.decode(sol.x, prob);
        rep = power_report(prob, w, links);
        rep.convex_solves = 1;
        rep.solver_status = sol.status;
    }
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

LinkMatrix links_from_beamformers(const BeamformerSet& w, double threshold) {
    if (threshold <= 0.0) throw std::invalid_argument("threshold must be positive");
    LinkMatrix links;
    links.entries.resize(w.num_users, w.num_rrh);
    for (int k = 0; k < w.num_users; ++k) {
        for (int n = 0; n < w.num_rrh; ++n) {
            links.entries(k, n) = w.link_block(k, n).norm() < threshold ? 1 : 0;
        }
    }
    return links;
}

std::uint64_t link_matrix_count(int num_users, int num_rrh) {
    const long double patterns = std::pow(2.0L, num_rrh) - 1.0L;
    long double total = 1.0L;
    for (int k = 0; k < num_users; ++k) {
        total *= patterns;
        if (total > static_cast<long double>(INT64_MAX)) return INT64_MAX;
    }
    return static_cast<std::uint64_t>(total);
}

void for_each_link_matrix(int num_users, int num_rrh,
                          const std::function<void(const LinkMatrix&)>& fn) {
    constexpr std::uint64_t kGuard = 1000000;
    const std::uint64_t count = link_matrix_count(num_users, num_rrh);
    if (count > kGuard) {
        std::ostringstream msg;
        msg << "link matrix enumeration refused: " << count << " > " << kGuard;
        throw std::invalid_argument(msg.str());
    }
    // Per-user row patterns: every N-bit mask except all-ones (bit set means
    // the link is removed).
    const std::uint32_t patterns = (1u << num_rrh) - 1;
    std::vector<std::uint32_t> digit(num_users, 0);
    LinkMatrix links;
    links.entries.resize(num_users, num_rrh);
    while (true) {
        for (int k = 0; k < num_users; ++k) {
            for (int n = 0; n < num_rrh; ++n) {
                links.entries(k, n) = (digit[k] >> n) & 1u;
            }
        }
        fn(links);
        int k = 0;
        while (k < num_users) {
            if (++digit[k] < patterns) break;
            digit[k] = 0;
            ++k;
        }
        if (k == num_users) break;
    }
}

SolveReport solve_with_repair(const DesignProblem& prob, LinkMatrix links,
                              const std::vector<std::pair<int, int>>& priority_desc,
                              int* convex_solves) {
    // Restore the top-priority link of any fully removed user row first.
    for (int k = 0; k < links.num_users(); ++k) {
        bool has_link = false;
        for (int n = 0; n < links.num_rrh(); ++n) has_link |= links.serves(k, n);
        if (has_link) continue;
        for (const auto& [pk, pn] : priority_desc) {
            if (pk == k) {
                links.entries(pk, pn) = 0;
                break;
            }
        }
    }

    SolveReport rep;
    while (true) {
        rep = solve_p2(prob, links);
        if (convex_solves) ++(*convex_solves);
        if (rep.feasible) return rep;
        bool restored = false;
        for (const auto& [pk, pn] : priority_desc) {
            if (!links.serves(pk, pn)) {
                links.entries(pk, pn) = 0;
                restored = true;
                break;
            }
        }
        if (!restored) return rep;  // already full cooperation
    }
}

}  // namespace cran
