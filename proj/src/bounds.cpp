#include "cran/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cran {

namespace {

// Cyclic Jacobi for a real symmetric matrix; returns the largest eigenvalue.
double jacobi_max_eigenvalue(Eigen::MatrixXd s) {
    const int n = static_cast<int>(s.rows());
    if (n == 1) return s(0, 0);
    const double fnorm = s.norm();
    if (fnorm == 0.0) return 0.0;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * s(p, q) * s(p, q);
        if (std::sqrt(off) <= 1e-13 * fnorm) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double snv = t * c;
                for (int i = 0; i < n; ++i) {
                    const double sip = s(i, p);
                    const double siq = s(i, q);
                    s(i, p) = c * sip - snv * siq;
                    s(i, q) = snv * sip + c * siq;
                }
                for (int i = 0; i < n; ++i) {
                    const double spi = s(p, i);
                    const double sqi = s(q, i);
                    s(p, i) = c * spi - snv * sqi;
                    s(q, i) = snv * spi + c * sqi;
                }
            }
        }
    }
    return s.diagonal().maxCoeff();
}

}  // namespace

double eigmax(const Eigen::MatrixXcd& m) {
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    const int n = static_cast<int>(h.rows());
    Eigen::MatrixXd s(2 * n, 2 * n);
    s.topLeftCorner(n, n) = h.real();
    s.topRightCorner(n, n) = -h.imag();
    s.bottomLeftCorner(n, n) = h.imag();
    s.bottomRightCorner(n, n) = h.real();
    return jacobi_max_eigenvalue(std::move(s));
}

double user_eigen_margin(const DesignProblem& prob, int k) {
    const Eigen::VectorXcd& hk = prob.h_hat[k];
    Eigen::MatrixXcd m = hk * hk.adjoint();
    m.diagonal() -= (prob.gamma(k) * prob.d_diag[k]).cast<std::complex<double>>();
    return eigmax(m);
}

BoundReport lower_bound(const DesignProblem& prob) {
    const int K = prob.num_users;
    const int N = prob.num_rrh;
    const int L = prob.num_antennas;
    if (N > 20) throw std::invalid_argument("lower_bound: subset enumeration guarded at N <= 20");

    BoundReport rep;
    rep.per_user.resize(K);
    rep.p_lower = 0.0;
    for (int k = 0; k < K; ++k) {
        PerUserBound best;
        best.power = std::numeric_limits<double>::infinity();
        for (std::uint32_t mask = 1; mask < (1u << N); ++mask) {
            const int size = __builtin_popcount(mask);
            Eigen::VectorXcd hsub(size * L);
            Eigen::VectorXd dsub(size * L);
            int idx = 0;
            for (int n = 0; n < N; ++n) {
                if (!(mask & (1u << n))) continue;
                hsub.segment(idx * L, L) = prob.h_hat[k].segment(n * L, L);
                dsub.segment(idx * L, L) = prob.d_diag[k].segment(n * L, L);
                ++idx;
            }
            Eigen::MatrixXcd m = hsub * hsub.adjoint();
            m.diagonal() -= (prob.gamma(k) * dsub).cast<std::complex<double>>();
            const double lam = eigmax(m);
            if (lam <= 0.0) continue;
            const double val = prob.eps1 * prob.rate(k) * size +
                               prob.eps2 * prob.gamma(k) * prob.sigma_sq(k) / lam;
            if (val < best.power) {
                best.power = val;
                best.subset_mask = mask;
                best.feasible = true;
            }
        }
        rep.per_user[k] = best;
        if (!best.feasible) {
            rep.infeasible_flag = true;
        } else {
            rep.p_lower += best.power;
        }
    }
    if (rep.infeasible_flag) rep.p_lower = 0.0;
    return rep;
}

double upper_bound(const DesignProblem& prob) {
    return prob.eps1 * prob.num_rrh * prob.rate.sum() +
           prob.eps2 * prob.num_rrh * prob.pt_watt;
}

BoundReport power_bounds(const DesignProblem& prob) {
    BoundReport rep = lower_bound(prob);
    rep.p_upper = upper_bound(prob);
    return rep;
}

}  // namespace cran
