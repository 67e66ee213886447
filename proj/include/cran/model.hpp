#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cran/rng.hpp"

namespace cran {

// Scenario and cost constants for one network configuration. Distances in
// km, powers in watts unless a suffix says otherwise.
struct SystemParams {
    int num_users = 3;          // K
    int num_rrh = 3;            // N
    int num_antennas = 2;       // L
    double gamma_db = 5.0;      // per-user SINR threshold (uniform)
    double pt_watt = 10.0;      // per-RRH transmit limit
    double gamma_ch = 0.01;     // estimation error power ratio
    double eps1 = 5.0;          // fronthaul power per unit rate, W*Hz/bps
    double eps2 = 2.0;          // amplifier inefficiency
    double noise_dbm = -95.0;   // receiver noise power
    double cell_radius_km = 0.5;
    double min_dist_km = 0.05;
    double pathloss_a = 128.1;  // PL = a + b*log10(d_km), in dB
    double pathloss_b = 37.6;
    double shadow_std_db = 10.0;

    double gamma_linear() const;
    double rate_bps_hz() const;      // log2(1 + gamma)
    double noise_watt() const;
    void validate() const;           // throws std::invalid_argument
};

struct Scenario {
    Eigen::MatrixX2d rrh_positions;  // N x 2, km
    Eigen::MatrixX2d ue_positions;   // K x 2, km
    // true_channels[k][n] is the length-L channel between RRH n and user k.
    std::vector<std::vector<Eigen::VectorXcd>> true_channels;
};

struct ChannelKnowledge {
    std::vector<std::vector<Eigen::VectorXcd>> estimates;  // K x N x L
    Eigen::MatrixXd err_var;                               // K x N, per-component
};

// Noise-normalized problem instance; the input to every algorithm. Channels
// are divided by the noise standard deviation so sigma_sq is identically 1,
// which keeps all optimization quantities O(1) while beamformer powers stay
// in watts.
struct DesignProblem {
    int num_users = 0;
    int num_rrh = 0;
    int num_antennas = 0;
    std::vector<Eigen::VectorXcd> h_hat;  // K stacked estimates, length N*L
    std::vector<Eigen::VectorXd> d_diag;  // K error covariance diagonals, length N*L
    Eigen::VectorXd gamma;                // K, linear
    Eigen::VectorXd sigma_sq;             // K, all 1 after normalization
    Eigen::VectorXd rate;                 // K, log2(1+gamma)
    double pt_watt = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    Eigen::VectorXd d_k_const;            // K, sigma_k^2 * gamma_k

    int stack_dim() const { return num_rrh * num_antennas; }
    void validate() const;
};

// Uniform positions on the cell disk, re-drawn until every RRH-UE pair is at
// least min_dist_km apart. Throws std::runtime_error after 10^6 attempts.
Scenario sample_positions(const SystemParams& params, Rng& rng);

// Fills true_channels: path loss, log-normal shadowing (one draw per link)
// and i.i.d. Rayleigh fading per antenna.
void generate_channels(Scenario& scenario, const SystemParams& params, Rng& rng);

// Per-link error variance gamma_ch*||h||^2/L; estimate = truth - error.
ChannelKnowledge generate_estimates(const Scenario& scenario, const SystemParams& params,
                                    Rng& rng);

DesignProblem assemble_problem(const ChannelKnowledge& knowledge, const SystemParams& params);

// Samples scenarios until the full-cooperation design problem is feasible.
// Throws std::runtime_error when max_attempts is exhausted.
struct FeasibleDraw {
    Scenario scenario;
    DesignProblem problem;
    int attempts = 0;
};
FeasibleDraw sample_feasible_problem(const SystemParams& params, Rng& rng, int max_attempts);

}  // namespace cran
