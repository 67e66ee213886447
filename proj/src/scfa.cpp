#include "cran/scfa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

namespace cran::scfa {

namespace {

struct Weights {
    double eta1;
    double eta2;
};

Weights resolve_weights(const DesignProblem& prob, const Config& cfg) {
    const double def = 0.5 * (prob.eps1 + prob.eps2);
    return {cfg.eta1 > 0.0 ? cfg.eta1 : def, cfg.eta2 > 0.0 ? cfg.eta2 : def};
}

double clamped_exp(double arg, double clamp) { return std::exp(std::min(arg, clamp)); }

}  // namespace

double smooth_objective(const DesignProblem& prob, const BeamformerSet& w, double a,
                        const Config& cfg) {
    const auto [eta1, eta2] = resolve_weights(prob, cfg);
    const int K = prob.num_users;
    const int N = prob.num_rrh;

    double q = prob.eps2 * w.w.squaredNorm();
    for (int n = 0; n < N; ++n) {
        double pn = 0.0;
        for (int k = 0; k < K; ++k) {
            const double nsq = w.link_block(k, n).squaredNorm();
            pn += nsq;
            q += prob.eps1 * prob.rate(k) * (1.0 - std::exp(-nsq / a));
        }
        q += eta1 * clamped_exp((pn - prob.pt_watt) / a, cfg.exp_clamp);
    }
    for (int k = 0; k < K; ++k) {
        const double rk = rho(prob, w, k);
        q += eta2 * (clamped_exp(rk * rk / a, cfg.exp_clamp) - 1.0);
    }
    return q;
}

Eigen::VectorXcd gradient(const DesignProblem& prob, const BeamformerSet& w, double a,
                          const Config& cfg) {
    const auto [eta1, eta2] = resolve_weights(prob, cfg);
    const int K = prob.num_users;
    const int N = prob.num_rrh;
    const int L = prob.num_antennas;
    const int NL = prob.stack_dim();

    Eigen::VectorXcd g = 2.0 * prob.eps2 * w.w;

    // Fronthaul smoothing and per-RRH power penalty act on link blocks.
    for (int n = 0; n < N; ++n) {
        double pn = 0.0;
        for (int k = 0; k < K; ++k) pn += w.link_block(k, n).squaredNorm();
        const double pow_coef =
            2.0 * eta1 / a * clamped_exp((pn - prob.pt_watt) / a, cfg.exp_clamp);
        for (int k = 0; k < K; ++k) {
            const auto wkn = w.link_block(k, n);
            const double cp_coef = 2.0 * prob.eps1 * prob.rate(k) / a *
                                   std::exp(-wkn.squaredNorm() / a);
            g.segment((k * N + n) * L, L) += (cp_coef + pow_coef) * wkn;
        }
    }

    // SINR penalty: quadratic forms applied blockwise per user pair.
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXcd& hk = prob.h_hat[k];
        const Eigen::VectorXd& dk = prob.d_diag[k];
        const double gk = prob.gamma(k);

        double rk = -gk * prob.sigma_sq(k);
        std::vector<std::complex<double>> prods(K);
        for (int l = 0; l < K; ++l) {
            const auto wl = w.user_block(l);
            prods[l] = hk.dot(wl);
            const double mismatch = dk.cwiseProduct(wl.cwiseAbs2()).sum();
            if (l == k) {
                rk += std::norm(prods[l]) - gk * mismatch;
            } else {
                rk -= gk * (std::norm(prods[l]) + mismatch);
            }
        }
        const double coef =
            4.0 * eta2 / a * rk * clamped_exp(rk * rk / a, cfg.exp_clamp);
        if (coef == 0.0) continue;
        for (int l = 0; l < K; ++l) {
            const auto wl = w.user_block(l);
            const Eigen::VectorXcd dw =
                dk.cast<std::complex<double>>().cwiseProduct(wl);
            Eigen::VectorXcd akw(NL);
            if (l == k) {
                akw = hk * prods[l] - gk * dw;  // (h h' - gamma D) w_k
            } else {
                akw = -gk * (hk * prods[l] + dw);  // -gamma (h h' + D) w_l
            }
            g.segment(l * NL, NL) += coef * akw;
        }
    }
    return g;
}

double bb_step(const Eigen::VectorXcd& grad_now, const Eigen::VectorXcd& grad_prev,
               const Eigen::VectorXcd& w_now, const Eigen::VectorXcd& w_prev, double fallback) {
    const Eigen::VectorXcd dg = grad_now - grad_prev;
    const Eigen::VectorXcd dw = w_now - w_prev;
    const double denom = dg.squaredNorm();
    if (denom < 1e-30) return fallback;
    const double mu = (dg.dot(dw)).real() / denom;
    if (!std::isfinite(mu) || mu <= 0.0) return fallback;
    return mu;
}

SolveReport run(const DesignProblem& prob, const Config& cfg, Trace* trace) {
    const auto t0 = std::chrono::steady_clock::now();
    const int K = prob.num_users;
    const int N = prob.num_rrh;

    SolveReport full = solve_p2(prob, LinkMatrix::full_cooperation(K, N));
    int solves = 1;
    if (!full.feasible) {
        full.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return full;
    }

    BeamformerSet bf = full.beamformers;
    double a = cfg.a0;
    double q_cur = smooth_objective(prob, bf, a, cfg);
    std::deque<double> window{q_cur};

    Eigen::VectorXcd grad_prev;
    Eigen::VectorXcd w_prev;
    double mu_prev = cfg.mu1;
    int iters = 0;

    for (int t = 1; t <= cfg.t_max; ++t) {
        const Eigen::VectorXcd g = gradient(prob, bf, a, cfg);
        double mu = (t == 1) ? cfg.mu1 : bb_step(g, grad_prev, bf.w, w_prev, mu_prev);

        BeamformerSet cand = bf;
        cand.w = bf.w - mu * g;
        double q_raw = smooth_objective(prob, cand, a, cfg);
        for (int guard = 0; !std::isfinite(q_raw) && guard < 60; ++guard) {
            mu *= 0.1;
            cand.w = bf.w - mu * g;
            q_raw = smooth_objective(prob, cand, a, cfg);
        }

        // Anneal when the surrogate has stabilized at the current smoothing,
        // then evaluate the new iterate under the updated smoothing.
        double q_new = q_raw;
        if (std::abs(q_raw - q_cur) < cfg.tau * a) {
            a *= cfg.xi;
            q_new = smooth_objective(prob, cand, a, cfg);
        }

        if (trace) {
            trace->q.push_back(q_new);
            trace->a.push_back(a);
            trace->step.push_back(mu);
            trace->grad_norm.push_back(g.norm());
        }

        bool stop = true;
        for (double qs : window) {
            if (std::abs(q_new - qs) >= cfg.q_t) {
                stop = false;
                break;
            }
        }
        window.push_back(q_new);
        while (static_cast<int>(window.size()) > cfg.delta_win + 1) window.pop_front();

        grad_prev = g;
        w_prev = bf.w;
        mu_prev = mu;
        bf = std::move(cand);
        q_cur = q_new;
        iters = t;
        if (stop) break;
    }

    // Priority list by descending beamformer norm, then threshold and repair.
    std::vector<std::pair<int, int>> priority;
    priority.reserve(K * N);
    for (int k = 0; k < K; ++k)
        for (int n = 0; n < N; ++n) priority.emplace_back(k, n);
    std::stable_sort(priority.begin(), priority.end(), [&](const auto& a_, const auto& b_) {
        return bf.link_block(a_.first, a_.second).norm() >
               bf.link_block(b_.first, b_.second).norm();
    });

    LinkMatrix links = links_from_beamformers(bf, cfg.kappa * prob.pt_watt);
    SolveReport rep = solve_with_repair(prob, links, priority, &solves);
    rep.convex_solves = solves;
    rep.gradient_iters = iters;
    rep.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace cran::scfa
