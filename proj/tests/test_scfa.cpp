#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "cran/baselines.hpp"
#include "cran/core.hpp"
#include "cran/scfa.hpp"

using namespace cran;

namespace {

DesignProblem random_problem(std::mt19937_64& rng, int K, int N, int L, double gamma_linear,
                             double err_scale = 0.05, double pt = 10.0, double ch_scale = 3.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DesignProblem prob;
    prob.num_users = K;
    prob.num_rrh = N;
    prob.num_antennas = L;
    prob.h_hat.resize(K);
    prob.d_diag.resize(K);
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXcd h(N * L);
        Eigen::VectorXd d(N * L);
        for (int n = 0; n < N; ++n) {
            const double err = err_scale * unif(rng);
            for (int a = 0; a < L; ++a) {
                h(n * L + a) = ch_scale * std::complex<double>(gauss(rng), gauss(rng));
                d(n * L + a) = err;
            }
        }
        prob.h_hat[k] = std::move(h);
        prob.d_diag[k] = std::move(d);
    }
    prob.gamma = Eigen::VectorXd::Constant(K, gamma_linear);
    prob.sigma_sq = Eigen::VectorXd::Ones(K);
    prob.rate = prob.gamma.unaryExpr([](double g) { return std::log2(1.0 + g); });
    prob.pt_watt = pt;
    prob.eps1 = 5.0;
    prob.eps2 = 2.0;
    prob.d_k_const = prob.gamma;
    return prob;
}

BeamformerSet random_beams(std::mt19937_64& rng, int K, int N, int L, double scale) {
    std::normal_distribution<double> gauss(0.0, scale);
    BeamformerSet w;
    w.num_users = K;
    w.num_rrh = N;
    w.num_antennas = L;
    w.w.resize(K * N * L);
    for (int i = 0; i < w.w.size(); ++i) w.w(i) = std::complex<double>(gauss(rng), gauss(rng));
    return w;
}

// Largest positive exponent argument appearing in the surrogate; the
// gradient checks require staying below the clamp.
double max_exponent_arg(const DesignProblem& prob, const BeamformerSet& w, double a) {
    double arg = -1e300;
    for (int n = 0; n < prob.num_rrh; ++n) {
        double pn = 0.0;
        for (int k = 0; k < prob.num_users; ++k) pn += w.link_block(k, n).squaredNorm();
        arg = std::max(arg, (pn - prob.pt_watt) / a);
    }
    for (int k = 0; k < prob.num_users; ++k) {
        const double r = rho(prob, w, k);
        arg = std::max(arg, r * r / a);
    }
    return arg;
}

}  // namespace

TEST_CASE("surrogate at zero beamformer matches direct substitution") {
    std::mt19937_64 rng(51);
    const DesignProblem prob = random_problem(rng, 2, 3, 2, 1.3);
    scfa::Config cfg;
    BeamformerSet w;
    w.num_users = 2;
    w.num_rrh = 3;
    w.num_antennas = 2;
    w.w = Eigen::VectorXcd::Zero(12);
    const double a = 0.7;
    const double eta = 0.5 * (prob.eps1 + prob.eps2);
    double expected = eta * 3 * std::exp(-prob.pt_watt / a);
    for (int k = 0; k < 2; ++k) {
        const double g = prob.gamma(k);
        expected += eta * (std::exp(g * g / a) - 1.0);
    }
    CHECK(scfa::smooth_objective(prob, w, a, cfg) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("surrogate approaches its series expansion for large smoothing") {
    std::mt19937_64 rng(52);
    const DesignProblem prob = random_problem(rng, 2, 2, 2, 1.3);
    const BeamformerSet w = random_beams(rng, 2, 2, 2, 0.5);
    scfa::Config cfg;
    const double a = 1e6;
    const double eta = 0.5 * (prob.eps1 + prob.eps2);

    double expected = prob.eps2 * w.w.squaredNorm();
    double series_bound = 0.0;
    for (int n = 0; n < 2; ++n) {
        double pn = 0.0;
        for (int k = 0; k < 2; ++k) {
            const double q = w.link_block(k, n).squaredNorm();
            pn += q;
            expected += prob.eps1 * prob.rate(k) * q / a;
            series_bound += prob.eps1 * prob.rate(k) * q * q / (2 * a * a);
        }
        expected += eta * std::exp((pn - prob.pt_watt) / a);
    }
    for (int k = 0; k < 2; ++k) {
        const double r = rho(prob, w, k);
        expected += eta * (std::exp(r * r / a) - 1.0);
    }
    CHECK(std::abs(scfa::smooth_objective(prob, w, a, cfg) - expected) <= series_bound + 1e-12);
}

TEST_CASE("surrogate converges to the exact power at a certified design") {
    std::mt19937_64 rng(53);
    const DesignProblem prob = random_problem(rng, 2, 2, 2, 1.5);
    const LinkMatrix full = LinkMatrix::full_cooperation(2, 2);
    const SolveReport rep = solve_p2(prob, full);
    REQUIRE(rep.feasible);
    // Strict power slack holds generically at these channel scales.
    REQUIRE(rep.p_per_rrh.maxCoeff() < prob.pt_watt * 0.9);

    double min_block = 1e300;
    for (int k = 0; k < 2; ++k)
        for (int n = 0; n < 2; ++n)
            min_block = std::min(min_block, rep.beamformers.link_block(k, n).squaredNorm());
    REQUIRE(min_block > 0.0);

    scfa::Config cfg;
    const double a = 1e-6 * min_block;
    const double q = scfa::smooth_objective(prob, rep.beamformers, a, cfg);
    CHECK(std::abs(q - rep.p_total) / rep.p_total < 1e-3);
}

TEST_CASE("gradient fundamentals") {
    std::mt19937_64 rng(54);
    const DesignProblem prob = random_problem(rng, 2, 2, 1, 1.2);
    scfa::Config cfg;

    SUBCASE("zero beamformer has zero gradient") {
        BeamformerSet w;
        w.num_users = 2;
        w.num_rrh = 2;
        w.num_antennas = 1;
        w.w = Eigen::VectorXcd::Zero(4);
        CHECK(scfa::gradient(prob, w, 1.0, cfg).norm() == 0.0);
    }

    SUBCASE("pure quadratic term gives 2 eps2 w") {
        DesignProblem quad = prob;
        quad.eps1 = 0.0;
        scfa::Config tiny = cfg;
        tiny.eta1 = 1e-300;
        tiny.eta2 = 1e-300;
        const BeamformerSet w = random_beams(rng, 2, 2, 1, 0.5);
        const Eigen::VectorXcd g = scfa::gradient(quad, w, 1.0, tiny);
        CHECK((g - 2.0 * quad.eps2 * w.w).norm() <= 1e-12 * w.w.norm());
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 rng(55);
    const double smoothing[3] = {1.0, 0.1, 0.01};
    for (int inst = 0; inst < 20; ++inst) {
        std::uniform_int_distribution<int> kd(1, 3), nd(1, 3), ld(1, 2);
        const int K = kd(rng), N = nd(rng), L = ld(rng);
        std::uniform_real_distribution<double> gdist(0.1, 0.3);
        const DesignProblem prob =
            random_problem(rng, K, N, L, gdist(rng), 0.05, 10.0, 1.0);
        BeamformerSet w = random_beams(rng, K, N, L, 0.15);
        const double a = smoothing[inst % 3];
        scfa::Config cfg;
        REQUIRE(max_exponent_arg(prob, w, a) < cfg.exp_clamp - 1.0);

        const Eigen::VectorXcd g = scfa::gradient(prob, w, a, cfg);
        const double h = 1e-6;
        Eigen::VectorXcd g_fd(w.w.size());
        for (int i = 0; i < w.w.size(); ++i) {
            BeamformerSet wp = w, wm = w;
            wp.w(i) += h;
            wm.w(i) -= h;
            const double d_re = (scfa::smooth_objective(prob, wp, a, cfg) -
                                 scfa::smooth_objective(prob, wm, a, cfg)) /
                                (2 * h);
            wp = w;
            wm = w;
            wp.w(i) += std::complex<double>(0, h);
            wm.w(i) -= std::complex<double>(0, h);
            const double d_im = (scfa::smooth_objective(prob, wp, a, cfg) -
                                 scfa::smooth_objective(prob, wm, a, cfg)) /
                                (2 * h);
            g_fd(i) = std::complex<double>(d_re, d_im);
        }
        CHECK((g - g_fd).norm() <= 1e-5 * std::max(1.0, g_fd.norm()));
    }
}

TEST_CASE("Barzilai-Borwein step and its fallback contract") {
    Eigen::VectorXcd dw(3);
    dw << std::complex<double>(1, 2), std::complex<double>(0, -1), std::complex<double>(2, 0);
    Eigen::VectorXcd w_prev = Eigen::VectorXcd::Zero(3);
    Eigen::VectorXcd g_prev = Eigen::VectorXcd::Zero(3);

    CHECK(scfa::bb_step(dw, g_prev, dw, w_prev, 0.5) == doctest::Approx(1.0));
    CHECK(scfa::bb_step(2.0 * dw, g_prev, dw, w_prev, 0.5) == doctest::Approx(0.5));

    std::mt19937_64 rng(56);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXcd dg(4), dx(4);
        for (int i = 0; i < 4; ++i) {
            dg(i) = std::complex<double>(gauss(rng), gauss(rng));
            dx(i) = std::complex<double>(gauss(rng), gauss(rng));
        }
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 4; ++i) {
            num += (std::conj(dg(i)) * dx(i)).real();
            den += std::norm(dg(i));
        }
        const double expected = num / den;
        const double got = scfa::bb_step(dg, Eigen::VectorXcd::Zero(4), dx,
                                         Eigen::VectorXcd::Zero(4), 0.123);
        if (expected > 0.0) {
            CHECK(got == doctest::Approx(expected).epsilon(1e-12));
        } else {
            CHECK(got == doctest::Approx(0.123));
        }
    }

    // Vanishing denominator falls back.
    CHECK(scfa::bb_step(Eigen::VectorXcd::Zero(3), g_prev, dw, w_prev, 0.25) ==
          doctest::Approx(0.25));
}

TEST_CASE("full pipeline on a scalar instance reduces to the convex solve") {
    DesignProblem prob;
    prob.num_users = 1;
    prob.num_rrh = 1;
    prob.num_antennas = 1;
    prob.h_hat = {Eigen::VectorXcd::Constant(1, 2.0)};
    prob.d_diag = {Eigen::VectorXd::Zero(1)};
    prob.gamma = Eigen::VectorXd::Constant(1, 1.0);
    prob.sigma_sq = Eigen::VectorXd::Ones(1);
    prob.rate = Eigen::VectorXd::Constant(1, 1.0);
    prob.pt_watt = 10.0;
    prob.eps1 = 5.0;
    prob.eps2 = 2.0;
    prob.d_k_const = prob.gamma;

    const SolveReport direct = solve_p2(prob, LinkMatrix::full_cooperation(1, 1));
    REQUIRE(direct.feasible);
    const SolveReport rep = scfa::run(prob);
    REQUIRE(rep.feasible);
    CHECK(rep.p_total == doctest::Approx(direct.p_total).epsilon(1e-6));
}

TEST_CASE("pipeline output is certified and never beats exhaustive search") {
    std::mt19937_64 rng(57);
    int done = 0;
    for (int t = 0; t < 12; ++t) {
        const DesignProblem prob = random_problem(rng, 2, 2, 1, 2.0);
        const SolveReport full = solve_p2(prob, LinkMatrix::full_cooperation(2, 2));
        if (!full.feasible) continue;
        scfa::Trace trace;
        const SolveReport rep = scfa::run(prob, {}, &trace);
        REQUIRE(rep.feasible);
        const SolveReport es = baselines::run_es(prob);
        REQUIRE(es.feasible);
        CHECK(rep.p_total >= es.p_total - 1e-6);
        for (int k = 0; k < 2; ++k) CHECK(rep.sinr(k) >= prob.gamma(k) * (1 - 1e-5));
        CHECK(rep.p_per_rrh.maxCoeff() <= prob.pt_watt + 1e-6);

        // Trace invariants: aligned lengths, nonincreasing smoothing.
        CHECK(trace.q.size() == trace.a.size());
        CHECK(trace.q.size() == trace.step.size());
        CHECK(trace.q.size() == trace.grad_norm.size());
        for (std::size_t i = 1; i < trace.a.size(); ++i) CHECK(trace.a[i] <= trace.a[i - 1]);
        CHECK(rep.gradient_iters == static_cast<int>(trace.q.size()));
        ++done;
    }
    CHECK(done >= 8);
}
