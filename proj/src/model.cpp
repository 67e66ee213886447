#include "cran/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cran/bounds.hpp"
#include "cran/core.hpp"

namespace cran {

double SystemParams::gamma_linear() const { return std::pow(10.0, gamma_db / 10.0); }

double SystemParams::rate_bps_hz() const { return std::log2(1.0 + gamma_linear()); }

double SystemParams::noise_watt() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

void SystemParams::validate() const {
    if (num_users < 1 || num_rrh < 1 || num_antennas < 1)
        throw std::invalid_argument("K, N, L must all be >= 1");
    if (pt_watt <= 0.0) throw std::invalid_argument("pt_watt must be positive");
    if (gamma_ch < 0.0) throw std::invalid_argument("gamma_ch must be nonnegative");
    if (eps1 <= 0.0 || eps2 <= 0.0) throw std::invalid_argument("eps1, eps2 must be positive");
    if (!(min_dist_km < cell_radius_km))
        throw std::invalid_argument("min_dist_km must be below cell_radius_km");
}

void DesignProblem::validate() const {
    const int nl = stack_dim();
    if ((int)h_hat.size() != num_users || (int)d_diag.size() != num_users)
        throw std::invalid_argument("per-user vectors do not match K");
    for (int k = 0; k < num_users; ++k) {
        if (h_hat[k].size() != nl || d_diag[k].size() != nl)
            throw std::invalid_argument("stacked channel size mismatch");
        if (d_diag[k].minCoeff() < 0.0)
            throw std::invalid_argument("error covariance must be nonnegative");
    }
}

namespace {

Eigen::Vector2d draw_in_disk(double radius, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = radius * std::sqrt(unif(rng));
    const double phi = 2.0 * std::numbers::pi * unif(rng);
    return {r * std::cos(phi), r * std::sin(phi)};
}

std::complex<double> draw_circular_gaussian(double std_per_component, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, std_per_component);
    return {gauss(rng), gauss(rng)};
}

}  // namespace

Scenario sample_positions(const SystemParams& params, Rng& rng) {
    params.validate();
    constexpr int kMaxAttempts = 1000000;
    const int K = params.num_users;
    const int N = params.num_rrh;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Scenario sc;
        sc.rrh_positions.resize(N, 2);
        sc.ue_positions.resize(K, 2);
        for (int n = 0; n < N; ++n) sc.rrh_positions.row(n) = draw_in_disk(params.cell_radius_km, rng);
        for (int k = 0; k < K; ++k) sc.ue_positions.row(k) = draw_in_disk(params.cell_radius_km, rng);
        bool ok = true;
        for (int k = 0; k < K && ok; ++k) {
            for (int n = 0; n < N && ok; ++n) {
                const double d = (sc.ue_positions.row(k) - sc.rrh_positions.row(n)).norm();
                if (d < params.min_dist_km) ok = false;
            }
        }
        if (ok) return sc;
    }
    throw std::runtime_error("sample_positions: geometry constraints unsatisfiable");
}

void generate_channels(Scenario& scenario, const SystemParams& params, Rng& rng) {
    const int K = params.num_users;
    const int N = params.num_rrh;
    const int L = params.num_antennas;
    std::normal_distribution<double> shadow(0.0, params.shadow_std_db);
    scenario.true_channels.assign(K, std::vector<Eigen::VectorXcd>(N));
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < N; ++n) {
            const double d = (scenario.ue_positions.row(k) - scenario.rrh_positions.row(n)).norm();
            const double pathloss_db = params.pathloss_a + params.pathloss_b * std::log10(d);
            // Large-scale gain shared by all antennas of the link.
            const double gain_db = -pathloss_db - shadow(rng);
            const double amp = std::pow(10.0, gain_db / 20.0);
            Eigen::VectorXcd h(L);
            for (int a = 0; a < L; ++a) {
                // Unit-power circular Gaussian component: Rayleigh envelope.
                h(a) = amp * draw_circular_gaussian(std::numbers::sqrt2 / 2.0, rng);
            }
            scenario.true_channels[k][n] = std::move(h);
        }
    }
}

ChannelKnowledge generate_estimates(const Scenario& scenario, const SystemParams& params,
                                    Rng& rng) {
    const int K = params.num_users;
    const int N = params.num_rrh;
    const int L = params.num_antennas;
    ChannelKnowledge kn;
    kn.estimates.assign(K, std::vector<Eigen::VectorXcd>(N));
    kn.err_var.resize(K, N);
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < N; ++n) {
            const Eigen::VectorXcd& h = scenario.true_channels[k][n];
            const double var = params.gamma_ch * h.squaredNorm() / L;
            kn.err_var(k, n) = var;
            Eigen::VectorXcd err = Eigen::VectorXcd::Zero(L);
            if (var > 0.0) {
                const double comp_std = std::sqrt(var / 2.0);
                for (int a = 0; a < L; ++a) err(a) = draw_circular_gaussian(comp_std, rng);
            }
            kn.estimates[k][n] = h - err;
        }
    }
    return kn;
}

DesignProblem assemble_problem(const ChannelKnowledge& knowledge, const SystemParams& params) {
    const int K = params.num_users;
    const int N = params.num_rrh;
    const int L = params.num_antennas;
    const double noise_std = std::sqrt(params.noise_watt());

    DesignProblem prob;
    prob.num_users = K;
    prob.num_rrh = N;
    prob.num_antennas = L;
    prob.h_hat.resize(K);
    prob.d_diag.resize(K);
    prob.gamma = Eigen::VectorXd::Constant(K, params.gamma_linear());
    prob.sigma_sq = Eigen::VectorXd::Ones(K);
    prob.rate = Eigen::VectorXd::Constant(K, params.rate_bps_hz());
    prob.pt_watt = params.pt_watt;
    prob.eps1 = params.eps1;
    prob.eps2 = params.eps2;
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXcd stacked(N * L);
        Eigen::VectorXd dvar(N * L);
        for (int n = 0; n < N; ++n) {
            stacked.segment(n * L, L) = knowledge.estimates[k][n] / noise_std;
            dvar.segment(n * L, L).setConstant(knowledge.err_var(k, n) / (noise_std * noise_std));
        }
        prob.h_hat[k] = std::move(stacked);
        prob.d_diag[k] = std::move(dvar);
    }
    prob.d_k_const = prob.sigma_sq.cwiseProduct(prob.gamma);
    return prob;
}

FeasibleDraw sample_feasible_problem(const SystemParams& params, Rng& rng, int max_attempts) {
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        Scenario sc = sample_positions(params, rng);
        generate_channels(sc, params, rng);
        ChannelKnowledge kn = generate_estimates(sc, params, rng);
        DesignProblem prob = assemble_problem(kn, params);

        // Necessary condition: every user needs a positive eigenvalue margin
        // under full cooperation; skip the convex solve when it fails.
        bool margin_ok = true;
        for (int k = 0; k < prob.num_users && margin_ok; ++k) {
            if (user_eigen_margin(prob, k) <= 0.0) margin_ok = false;
        }
        if (!margin_ok) continue;

        SolveReport rep = solve_p2(prob, LinkMatrix::full_cooperation(prob.num_users, prob.num_rrh));
        if (rep.feasible) {
            return {std::move(sc), std::move(prob), attempt};
        }
    }
    throw std::runtime_error("sample_feasible_problem: attempt cap exceeded");
}

}  // namespace cran
