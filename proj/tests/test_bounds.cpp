#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <random>

#include "cran/baselines.hpp"
#include "cran/bounds.hpp"
#include "cran/core.hpp"

using namespace cran;

namespace {

Eigen::MatrixXcd random_hermitian(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    return 0.5 * (a + a.adjoint());
}

// Characteristic polynomial by the Faddeev-LeVerrier recursion, then roots
// of the companion matrix through the general (non-selfadjoint) eigensolver:
// a fully independent route to the spectrum.
double companion_max_eigenvalue(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    std::vector<double> coef(n + 1, 0.0);  // p(x) = x^n + coef[1] x^{n-1} + ...
    Eigen::MatrixXcd mk = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd acc = eye;
    for (int k = 1; k <= n; ++k) {
        mk = m * acc;
        coef[k] = -mk.trace().real() / k;
        acc = mk + coef[k] * eye;
    }
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -coef[n - i];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);
    return es.eigenvalues().real().maxCoeff();
}

DesignProblem make_problem(int K, int N, int L, const std::vector<Eigen::VectorXcd>& h,
                           const std::vector<Eigen::VectorXd>& d, double gamma, double pt) {
    DesignProblem prob;
    prob.num_users = K;
    prob.num_rrh = N;
    prob.num_antennas = L;
    prob.h_hat = h;
    prob.d_diag = d;
    prob.gamma = Eigen::VectorXd::Constant(K, gamma);
    prob.sigma_sq = Eigen::VectorXd::Ones(K);
    prob.rate = Eigen::VectorXd::Constant(K, std::log2(1.0 + gamma));
    prob.pt_watt = pt;
    prob.eps1 = 5.0;
    prob.eps2 = 2.0;
    prob.d_k_const = prob.gamma;
    return prob;
}

}  // namespace

TEST_CASE("largest Hermitian eigenvalue: identities and oracle agreement") {
    CHECK(eigmax(Eigen::MatrixXcd::Identity(2, 2)) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(31);
    SUBCASE("rank-1 minus scaled identity has a closed form") {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int t = 0; t < 10; ++t) {
            Eigen::VectorXcd h(4);
            for (int i = 0; i < 4; ++i) h(i) = std::complex<double>(gauss(rng), gauss(rng));
            const double shift = 0.37;
            Eigen::MatrixXcd m = h * h.adjoint();
            m.diagonal().array() -= shift;
            CHECK(eigmax(m) == doctest::Approx(h.squaredNorm() - shift).epsilon(1e-10));
        }
    }

    SUBCASE("random 8x8 matches the companion-matrix oracle") {
        for (int t = 0; t < 20; ++t) {
            const Eigen::MatrixXcd m = random_hermitian(rng, 8);
            const double ours = eigmax(m);
            const double oracle = companion_max_eigenvalue(m);
            CHECK(std::abs(ours - oracle) <= 1e-8 * std::max(1.0, std::abs(oracle)));
        }
    }
}

TEST_CASE("upper bound closed form") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Eigen::VectorXcd> h(3);
    std::vector<Eigen::VectorXd> d(3);
    for (int k = 0; k < 3; ++k) {
        h[k] = Eigen::VectorXcd::NullaryExpr(
            6, [&](Eigen::Index) { return std::complex<double>(gauss(rng), gauss(rng)); });
        d[k] = Eigen::VectorXd::Zero(6);
    }
    const double gamma = std::pow(10.0, 0.5);
    DesignProblem prob = make_problem(3, 3, 2, h, d, gamma, 10.0);
    CHECK(upper_bound(prob) ==
          doctest::Approx(5.0 * 3 * 3 * std::log2(1 + gamma) + 2.0 * 3 * 10.0));
    CHECK(upper_bound(prob) == doctest::Approx(152.59).epsilon(1e-3));

    prob.gamma.setZero();
    prob.rate.setZero();
    CHECK(upper_bound(prob) == doctest::Approx(60.0));
}

TEST_CASE("per-user lower bound: closed forms and subset structure") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SUBCASE("single RRH has exactly one subset") {
        Eigen::VectorXcd h1 = Eigen::VectorXcd::NullaryExpr(
            2, [&](Eigen::Index) { return std::complex<double>(gauss(rng), gauss(rng)); });
        Eigen::VectorXd d1 = Eigen::VectorXd::Constant(2, 0.05);
        DesignProblem prob = make_problem(1, 1, 2, {h1}, {d1}, 2.0, 10.0);
        const BoundReport rep = lower_bound(prob);
        REQUIRE_FALSE(rep.infeasible_flag);
        const double lam = user_eigen_margin(prob, 0);
        CHECK(rep.per_user[0].power ==
              doctest::Approx(5.0 * std::log2(3.0) + 2.0 * 2.0 / lam).epsilon(1e-12));
        CHECK(rep.per_user[0].subset_mask == 1);
    }

    SUBCASE("perfect CSI reduces to channel norms per subset") {
        const int N = 3, L = 2;
        Eigen::VectorXcd h = Eigen::VectorXcd::NullaryExpr(
            N * L, [&](Eigen::Index) { return std::complex<double>(gauss(rng), gauss(rng)); });
        DesignProblem prob =
            make_problem(1, N, L, {h}, {Eigen::VectorXd::Zero(N * L)}, 1.5, 10.0);
        const BoundReport rep = lower_bound(prob);
        double expected = 1e300;
        for (std::uint32_t mask = 1; mask < 8; ++mask) {
            double nrm = 0.0;
            int size = 0;
            for (int n = 0; n < N; ++n) {
                if (mask & (1u << n)) {
                    nrm += h.segment(n * L, L).squaredNorm();
                    ++size;
                }
            }
            expected = std::min(expected,
                                5.0 * std::log2(2.5) * size + 2.0 * 1.5 / nrm);
        }
        CHECK(rep.p_lower == doctest::Approx(expected).epsilon(1e-9));
    }

    SUBCASE("subset eigenvalue grows with the subset under perfect CSI") {
        const int N = 4, L = 2;
        Eigen::VectorXcd h = Eigen::VectorXcd::NullaryExpr(
            N * L, [&](Eigen::Index) { return std::complex<double>(gauss(rng), gauss(rng)); });
        auto lam_of = [&](std::uint32_t mask) {
            int size = __builtin_popcount(mask);
            Eigen::VectorXcd sub(size * L);
            int idx = 0;
            for (int n = 0; n < N; ++n) {
                if (mask & (1u << n)) sub.segment(idx++ * L, L) = h.segment(n * L, L);
            }
            return eigmax(sub * sub.adjoint());
        };
        for (std::uint32_t mask = 1; mask < 15; ++mask) {
            for (int n = 0; n < N; ++n) {
                if (mask & (1u << n)) continue;
                CHECK(lam_of(mask | (1u << n)) >= lam_of(mask) - 1e-10);
            }
        }
    }
}

TEST_CASE("negative margins flag infeasibility, matching the solver verdict") {
    // Large error covariance and a steep target push every subset margin
    // negative.
    Eigen::VectorXcd h = Eigen::VectorXcd::Constant(2, 0.1);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(2, 10.0);
    DesignProblem prob = make_problem(1, 2, 1, {h}, {d}, 50.0, 10.0);
    const BoundReport rep = lower_bound(prob);
    CHECK(rep.infeasible_flag);
    const SolveReport full = solve_p2(prob, LinkMatrix::full_cooperation(1, 2));
    CHECK_FALSE(full.feasible);
}

TEST_CASE("single-user optimum achieves the lower bound when power is slack") {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 8; ++t) {
        const int N = 2, L = 2;
        Eigen::VectorXcd h = Eigen::VectorXcd::NullaryExpr(N * L, [&](Eigen::Index) {
            return 2.0 * std::complex<double>(gauss(rng), gauss(rng));
        });
        Eigen::VectorXd d = Eigen::VectorXd::Constant(N * L, 0.02);
        const DesignProblem prob = make_problem(1, N, L, {h}, {d}, 2.0, 1e7);
        const BoundReport bound = lower_bound(prob);
        REQUIRE_FALSE(bound.infeasible_flag);
        const SolveReport es = baselines::run_es(prob);
        REQUIRE(es.feasible);
        CHECK(std::abs(es.p_total - bound.p_lower) <= 1e-6 * bound.p_lower);
    }
}
