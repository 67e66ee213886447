#include "socp_builder.hpp"

#include <cmath>
#include <stdexcept>

namespace cran::detail {

BuiltSocp build_socp(const DesignProblem& prob, const LinkMatrix& links, SocpObjective objective,
                     const Eigen::MatrixXd* weights) {
    const int K = prob.num_users;
    const int N = prob.num_rrh;
    const int L = prob.num_antennas;
    const int NL = prob.stack_dim();
    if (links.num_users() != K || links.num_rrh() != N)
        throw std::invalid_argument("link matrix dimensions do not match problem");
    if (objective != SocpObjective::RadiatedEpigraph && weights == nullptr)
        throw std::invalid_argument("weighted objective requires per-link weights");

    BuiltSocp out;
    // Active complex coordinates in stack order, plus per-user views.
    std::vector<int> inverse(K * NL, -1);
    struct UserCoord {
        int ai;   // index into `active`
        int pos;  // position within the user's stacked vector
    };
    std::vector<std::vector<UserCoord>> user_coords(K);
    struct ActiveLink {
        int k, n, first_ai;
    };
    std::vector<ActiveLink> link_list;
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < N; ++n) {
            if (!links.serves(k, n)) continue;
            link_list.push_back({k, n, static_cast<int>(out.active.size())});
            for (int a = 0; a < L; ++a) {
                const int global = (k * N + n) * L + a;
                inverse[global] = static_cast<int>(out.active.size());
                user_coords[k].push_back({static_cast<int>(out.active.size()), n * L + a});
                out.active.push_back(global);
            }
        }
    }
    const int na = static_cast<int>(out.active.size());
    out.x_index.assign(2 * na, -1);

    std::vector<conic::ConeBlock> cones;
    std::vector<double> cvals;
    int col = 0;
    auto add_cone = [&](conic::ConeType type, int dim) {
        cones.push_back({type, dim});
        const int off = col;
        col += dim;
        cvals.resize(col, 0.0);
        return off;
    };

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> bvals;
    int row = 0;
    auto add_row = [&](double rhs) {
        bvals.push_back(rhs);
        return row++;
    };

    // --- Objective block(s): where the beamformer coordinates live ---
    if (objective == SocpObjective::RadiatedEpigraph) {
        out.scale = 1.0;
        const int off = add_cone(conic::ConeType::SecondOrder, 1 + 2 * na);
        cvals[off] = 1.0;
        for (int i = 0; i < na; ++i) {
            out.x_index[2 * i] = off + 1 + 2 * i;
            out.x_index[2 * i + 1] = off + 2 + 2 * i;
        }
    } else if (objective == SocpObjective::WeightedSquares) {
        out.scale = 0.5;
        std::vector<int> s_off(link_list.size());
        for (std::size_t li = 0; li < link_list.size(); ++li) {
            s_off[li] = add_cone(conic::ConeType::NonNeg, 1);
            cvals[s_off[li]] = (*weights)(link_list[li].k, link_list[li].n);
        }
        for (std::size_t li = 0; li < link_list.size(); ++li) {
            // Rotated-cone encoding of s >= ||w_kn||^2:
            // (s + 1, 2 w_kn, s - 1) in a second-order cone.
            const int off = add_cone(conic::ConeType::SecondOrder, 2 + 2 * L);
            const int head = off;
            const int tail = off + 1 + 2 * L;
            for (int a = 0; a < L; ++a) {
                const int ai = link_list[li].first_ai + a;
                out.x_index[2 * ai] = off + 1 + 2 * a;
                out.x_index[2 * ai + 1] = off + 2 + 2 * a;
            }
            int r = add_row(1.0);
            trips.emplace_back(r, head, 1.0);
            trips.emplace_back(r, s_off[li], -1.0);
            r = add_row(-1.0);
            trips.emplace_back(r, tail, 1.0);
            trips.emplace_back(r, s_off[li], -1.0);
        }
    } else {  // WeightedNorms
        out.scale = 1.0;
        for (const ActiveLink& lk : link_list) {
            const int off = add_cone(conic::ConeType::SecondOrder, 1 + 2 * L);
            cvals[off] = (*weights)(lk.k, lk.n);
            for (int a = 0; a < L; ++a) {
                const int ai = lk.first_ai + a;
                out.x_index[2 * ai] = off + 1 + 2 * a;
                out.x_index[2 * ai + 1] = off + 2 + 2 * a;
            }
        }
    }
    const double sc = out.scale;

    // --- Per-user SINR cones ---
    // sqrt(1 + 1/gamma_k) Re{h_k' w_k} >= || (h_k' w_l)_l ; D_k^{1/2} w ; sigma_k ||
    // using the exact rank-1 plus diagonal factorization of H-tilde.
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXcd& hk = prob.h_hat[k];
        const Eigen::VectorXd& dk = prob.d_diag[k];
        int nd = 0;
        for (int l = 0; l < K; ++l) {
            for (const UserCoord& uc : user_coords[l]) {
                if (dk(uc.pos) > 0.0) ++nd;
            }
        }
        const int dim = 1 + 2 * K + 2 * nd + 1;
        const int off = add_cone(conic::ConeType::SecondOrder, dim);

        const double fac = std::sqrt(1.0 + 1.0 / prob.gamma(k));
        int r = add_row(0.0);
        trips.emplace_back(r, off, 1.0);
        for (const UserCoord& uc : user_coords[k]) {
            const std::complex<double> h = hk(uc.pos);
            trips.emplace_back(r, out.x_index[2 * uc.ai], -fac * h.real() * sc);
            trips.emplace_back(r, out.x_index[2 * uc.ai + 1], -fac * h.imag() * sc);
        }

        int u = off + 1;
        for (int l = 0; l < K; ++l) {
            r = add_row(0.0);  // u = Re{h_k' w_l}
            trips.emplace_back(r, u++, 1.0);
            for (const UserCoord& uc : user_coords[l]) {
                const std::complex<double> h = hk(uc.pos);
                trips.emplace_back(r, out.x_index[2 * uc.ai], -h.real() * sc);
                trips.emplace_back(r, out.x_index[2 * uc.ai + 1], -h.imag() * sc);
            }
            r = add_row(0.0);  // u = Im{h_k' w_l}
            trips.emplace_back(r, u++, 1.0);
            for (const UserCoord& uc : user_coords[l]) {
                const std::complex<double> h = hk(uc.pos);
                trips.emplace_back(r, out.x_index[2 * uc.ai], h.imag() * sc);
                trips.emplace_back(r, out.x_index[2 * uc.ai + 1], -h.real() * sc);
            }
        }
        for (int l = 0; l < K; ++l) {
            for (const UserCoord& uc : user_coords[l]) {
                const double sig = std::sqrt(dk(uc.pos));
                if (!(sig > 0.0)) continue;
                r = add_row(0.0);
                trips.emplace_back(r, u++, 1.0);
                trips.emplace_back(r, out.x_index[2 * uc.ai], -sig * sc);
                r = add_row(0.0);
                trips.emplace_back(r, u++, 1.0);
                trips.emplace_back(r, out.x_index[2 * uc.ai + 1], -sig * sc);
            }
        }
        r = add_row(std::sqrt(prob.sigma_sq(k)));
        trips.emplace_back(r, u++, 1.0);
    }

    // --- Per-RRH transmit power cones ---
    for (int n = 0; n < N; ++n) {
        int coords = 0;
        for (int k = 0; k < K; ++k) {
            if (links.serves(k, n)) coords += L;
        }
        if (coords == 0) continue;
        const int off = add_cone(conic::ConeType::SecondOrder, 1 + 2 * coords);
        int r = add_row(std::sqrt(prob.pt_watt));
        trips.emplace_back(r, off, 1.0);
        int u = off + 1;
        for (int k = 0; k < K; ++k) {
            if (!links.serves(k, n)) continue;
            for (int a = 0; a < L; ++a) {
                const int ai = inverse[(k * N + n) * L + a];
                r = add_row(0.0);
                trips.emplace_back(r, u++, 1.0);
                trips.emplace_back(r, out.x_index[2 * ai], -sc);
                r = add_row(0.0);
                trips.emplace_back(r, u++, 1.0);
                trips.emplace_back(r, out.x_index[2 * ai + 1], -sc);
            }
        }
    }

    out.prog.objective = Eigen::Map<Eigen::VectorXd>(cvals.data(), col);
    out.prog.eq_rhs = Eigen::Map<Eigen::VectorXd>(bvals.data(), row);
    out.prog.eq_matrix.resize(row, col);
    out.prog.eq_matrix.setFromTriplets(trips.begin(), trips.end());
    out.prog.cones = std::move(cones);
    return out;
}

}  // namespace cran::detail
