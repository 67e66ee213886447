#include "cran/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cran::conic {

namespace {

constexpr double kHuge = 1e30;

// Per-block Nesterov-Todd scaling. For NonNeg blocks W is the diagonal
// sqrt(x/s). For second-order blocks, with wbar = (a, q) the unit-hyperbolic
// scaling point (a^2 - ||q||^2 = 1),
//
//   W     = eta * [ a  q' ; q  I + q q' / (1 + a) ]
//   W^2   = eta^2 * (2 wbar wbar' - J),   J = diag(1, -I)
//   W^-1  = (1/eta) * [ a  -q' ; -q  I + q q' / (1 + a) ]
struct Scaling {
    Eigen::VectorXd diag;                // NonNeg coordinates
    std::vector<double> eta;             // per block; unused for NonNeg
    std::vector<Eigen::VectorXd> wbar;   // per block; empty for NonNeg
};

struct Layout {
    std::vector<int> offset;
    int nvar = 0;
    int degree = 0;  // barrier degree: nonneg coords + #SOC blocks
};

Layout make_layout(const ConeProgram& prog) {
    Layout lay;
    lay.offset.reserve(prog.cones.size());
    int off = 0;
    for (const ConeBlock& blk : prog.cones) {
        lay.offset.push_back(off);
        off += blk.dim;
        lay.degree += (blk.type == ConeType::NonNeg) ? blk.dim : 1;
    }
    lay.nvar = off;
    return lay;
}

double jnorm_sq(const Eigen::Ref<const Eigen::VectorXd>& u) {
    return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

Eigen::VectorXd identity_vec(const ConeProgram& prog, const Layout& lay) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(lay.nvar);
    for (std::size_t bi = 0; bi < prog.cones.size(); ++bi) {
        const ConeBlock& blk = prog.cones[bi];
        if (blk.type == ConeType::NonNeg) {
            e.segment(lay.offset[bi], blk.dim).setOnes();
        } else {
            e(lay.offset[bi]) = 1.0;
        }
    }
    return e;
}

double cone_margin(const ConeProgram& prog, const Layout& lay, const Eigen::VectorXd& v) {
    double m = kHuge;
    for (std::size_t bi = 0; bi < prog.cones.size(); ++bi) {
        const ConeBlock& blk = prog.cones[bi];
        auto seg = v.segment(lay.offset[bi], blk.dim);
        if (blk.type == ConeType::NonNeg) {
            m = std::min(m, seg.minCoeff());
        } else {
            m = std::min(m, seg(0) - seg.tail(blk.dim - 1).norm());
        }
    }
    return m;
}

void bring_to_cone(const ConeProgram& prog, const Layout& lay, Eigen::VectorXd& v) {
    const double m = cone_margin(prog, lay, v);
    if (m <= 1e-8) {
        v += (1.0 - m) * identity_vec(prog, lay);
    }
}

Eigen::VectorXd jprod(const ConeProgram& prog, const Layout& lay, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& v) {
    Eigen::VectorXd w(lay.nvar);
    for (std::size_t bi = 0; bi < prog.cones.size(); ++bi) {
        const ConeBlock& blk = prog.cones[bi];
        const int o = lay.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            w.segment(o, blk.dim) =
                u.segment(o, blk.dim).cwiseProduct(v.segment(o, blk.dim));
        } else {
            const int d = blk.dim;
            w(o) = u.segment(o, d).dot(v.segment(o, d));
            w.segment(o + 1, d - 1) =
                u(o) * v.segment(o + 1, d - 1) + v(o) * u.segment(o + 1, d - 1);
        }
    }
    return w;
}

// z = lambda \ d, the solution of lambda o z = d.
Eigen::VectorXd jdiv(const ConeProgram& prog, const Layout& lay, const Eigen::VectorXd& lambda,
                     const Eigen::VectorXd& d) {
    Eigen::VectorXd z(lay.nvar);
    for (std::size_t bi = 0; bi < prog.cones.size(); ++bi) {
        const ConeBlock& blk = prog.cones[bi];
        const int o = lay.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            z.segment(o, blk.dim) =
                d.segment(o, blk.dim).cwiseQuotient(lambda.segment(o, blk.dim));
        } else {
            const int d1 = blk.dim - 1;
            const double l0 = lambda(o);
            const double rho = l0 * l0 - lambda.segment(o + 1, d1).squaredNorm();
            const double zeta = lambda.segment(o + 1, d1).dot(d.segment(o + 1, d1));
            const double factor = (zeta / l0 - d(o)) / rho;
            z(o) = (l0 * d(o) - zeta) / rho;
            z.segment(o + 1, d1) =
                factor * lambda.segment(o + 1, d1) + d.segment(o + 1, d1) / l0;
        }
    }
    return z;
}

// Largest alpha >= 0 with u + alpha du still in the cone; u strictly interior.
double max_step(const ConeProgram& prog, const Layout& lay, const Eigen::VectorXd& u,
                const Eigen::VectorXd& du) {
    double alpha = kHuge;
    for (std::size_t bi = 0; bi < prog.cones.size(); ++bi) {
        const ConeBlock& blk = prog.cones[bi];
        const int o = lay.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) {
                if (du(o + i) < 0.0) alpha = std::min(alpha, -u(o + i) / du(o + i));
            }
        } else {
            const int d1 = blk.dim - 1;
            const double c0 = u(o) * u(o) - u.segment(o + 1, d1).squaredNorm();
            const double b0 = u(o) * du(o) - u.segment(o + 1, d1).dot(du.segment(o + 1, d1));
            const double a0 = du(o) * du(o) - du.segment(o + 1, d1).squaredNorm();
            const double disc = b0 * b0 - a0 * c0;
            // Smallest positive root of a0 t^2 + 2 b0 t + c0 = 0 marks the
            // first boundary crossing along the ray.
            if (a0 < 0.0 || (b0 < 0.0 && disc >= 0.0)) {
                const double denom = -b0 + std::sqrt(std::max(disc, 0.0));
                if (denom > 0.0) alpha = std::min(alpha, c0 / denom);
            }
        }
    }
    return alpha;
}

struct HsdState {
    Eigen::VectorXd x, y, s;
    double tau = 1.0, kap = 1.0;
};

// Smallest eigenvalue of the Jordan products x o s (blockwise) and tau*kap;
// used for the wide-neighborhood centrality test.
double min_product_eig(const ConeProgram& prog, const Layout& lay, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& s, double tau, double kap) {
    double me = tau * kap;
    for (std::size_t bi = 0; bi < prog.cones.size(); ++bi) {
        const ConeBlock& blk = prog.cones[bi];
        const int o = lay.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            for (int i = 0; i < blk.dim; ++i) me = std::min(me, x(o + i) * s(o + i));
        } else {
            const int d1 = blk.dim - 1;
            const double p0 = x.segment(o, blk.dim).dot(s.segment(o, blk.dim));
            const Eigen::VectorXd p1 =
                x(o) * s.segment(o + 1, d1) + s(o) * x.segment(o + 1, d1);
            me = std::min(me, p0 - p1.norm());
        }
    }
    return me;
}

class HsdSolver {
  public:
    HsdSolver(const ConeProgram& prog, const SolverOptions& opts)
        : prog_(prog), opts_(opts), lay_(make_layout(prog)) {
        At_ = prog_.eq_matrix.transpose();
        bnorm_ = prog_.eq_rhs.norm();
        cnorm_ = prog_.objective.norm();
        a_inf_ = 1.0;
        for (int k = 0; k < prog_.eq_matrix.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(prog_.eq_matrix, k); it; ++it) {
                a_inf_ = std::max(a_inf_, std::abs(it.value()));
            }
        }
        ident_ = identity_vec(prog_, lay_);
    }

    ConeSolution run();

  private:
    void compute_scaling(const Eigen::VectorXd& x, const Eigen::VectorXd& s);
    Eigen::VectorXd apply_w(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_w_inv(const Eigen::VectorXd& v) const;
    Eigen::VectorXd apply_w2(const Eigen::VectorXd& v) const { return apply_w(apply_w(v)); }
    bool factorize();
    Eigen::VectorXd solve_normal(const Eigen::VectorXd& rhs) const;

    struct Direction {
        Eigen::VectorXd dx, dy, ds;
        double dtau = 0.0, dkap = 0.0;
    };
    // Right-hand sides of the linearized self-dual system:
    //   A dx - b dtau                  = r1
    //   -A' dy + c dtau - ds           = r2
    //   c' dx - b' dy + dkap           = r3
    //   lambda o (W^{-1} dx + W ds)    = rs
    //   tau dkap + kap dtau            = rk
    struct Rhs {
        Eigen::VectorXd r1, r2;
        double r3 = 0.0;
        Eigen::VectorXd rs;
        double rk = 0.0;
    };
    // Pieces shared by the predictor and corrector solves of one iteration.
    struct IterCtx {
        Eigen::VectorXd w2c, aw2c, g2, v;
        double cw2c = 0.0;
    };
    IterCtx make_ctx() const;
    Direction solve_linearized(const IterCtx& ctx, const Rhs& rhs, const HsdState& st) const;
    Rhs residual_of(const Direction& dir, const Rhs& rhs, const HsdState& st) const;
    Direction direction(const IterCtx& ctx, double eta, const Eigen::VectorXd& ds_rhs,
                        double dkap_rhs, const HsdState& st) const;

    const ConeProgram& prog_;
    SolverOptions opts_;
    Layout lay_;
    Eigen::SparseMatrix<double> At_;
    Eigen::VectorXd ident_;
    double bnorm_ = 0.0, cnorm_ = 0.0, a_inf_ = 1.0;

    Scaling scal_;
    Eigen::VectorXd lambda_;
    Eigen::MatrixXd b_mat_;  // A W
    Eigen::MatrixXd m_;      // A W^2 A' + delta I (lower triangle valid)
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd rp_, rd_;
    double rg_ = 0.0;
};

void HsdSolver::compute_scaling(const Eigen::VectorXd& x, const Eigen::VectorXd& s) {
    scal_.diag.resize(lay_.nvar);
    scal_.eta.assign(prog_.cones.size(), 0.0);
    scal_.wbar.assign(prog_.cones.size(), Eigen::VectorXd());
    for (std::size_t bi = 0; bi < prog_.cones.size(); ++bi) {
        const ConeBlock& blk = prog_.cones[bi];
        const int o = lay_.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            scal_.diag.segment(o, blk.dim) =
                (x.segment(o, blk.dim).array() / s.segment(o, blk.dim).array()).sqrt();
        } else {
            const int d = blk.dim;
            const double xj = std::sqrt(jnorm_sq(x.segment(o, d)));
            const double sj = std::sqrt(jnorm_sq(s.segment(o, d)));
            const Eigen::VectorXd xb = x.segment(o, d) / xj;
            const Eigen::VectorXd sb = s.segment(o, d) / sj;
            const double gamma = std::sqrt(0.5 * (1.0 + xb.dot(sb)));
            Eigen::VectorXd wb(d);
            wb(0) = (xb(0) + sb(0)) / (2.0 * gamma);
            wb.tail(d - 1) = (xb.tail(d - 1) - sb.tail(d - 1)) / (2.0 * gamma);
            scal_.eta[bi] = std::sqrt(xj / sj);
            scal_.wbar[bi] = std::move(wb);
        }
    }
    lambda_ = apply_w(s);
#ifdef CRAN_CONIC_DEBUG
    {
        const Eigen::VectorXd winv_x = apply_w_inv(x);
        fprintf(stderr, "   scal |Ws - Winv x|=%9.2e  lambda0=%9.2e\n",
                (lambda_ - winv_x).lpNorm<Eigen::Infinity>(), lambda_(0));
    }
#endif
}

Eigen::VectorXd HsdSolver::apply_w(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r(lay_.nvar);
    for (std::size_t bi = 0; bi < prog_.cones.size(); ++bi) {
        const ConeBlock& blk = prog_.cones[bi];
        const int o = lay_.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            r.segment(o, blk.dim) =
                scal_.diag.segment(o, blk.dim).cwiseProduct(v.segment(o, blk.dim));
        } else {
            const int d = blk.dim;
            const Eigen::VectorXd& wb = scal_.wbar[bi];
            const double a = wb(0);
            const double t = wb.tail(d - 1).dot(v.segment(o + 1, d - 1));
            r(o) = scal_.eta[bi] * (a * v(o) + t);
            r.segment(o + 1, d - 1) =
                scal_.eta[bi] *
                (v.segment(o + 1, d - 1) + (v(o) + t / (1.0 + a)) * wb.tail(d - 1));
        }
    }
    return r;
}

Eigen::VectorXd HsdSolver::apply_w_inv(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r(lay_.nvar);
    for (std::size_t bi = 0; bi < prog_.cones.size(); ++bi) {
        const ConeBlock& blk = prog_.cones[bi];
        const int o = lay_.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            r.segment(o, blk.dim) =
                v.segment(o, blk.dim).cwiseQuotient(scal_.diag.segment(o, blk.dim));
        } else {
            const int d = blk.dim;
            const Eigen::VectorXd& wb = scal_.wbar[bi];
            const double a = wb(0);
            const double t = wb.tail(d - 1).dot(v.segment(o + 1, d - 1));
            r(o) = (a * v(o) - t) / scal_.eta[bi];
            r.segment(o + 1, d - 1) =
                (v.segment(o + 1, d - 1) + (-v(o) + t / (1.0 + a)) * wb.tail(d - 1)) /
                scal_.eta[bi];
        }
    }
    return r;
}

bool HsdSolver::factorize() {
    const Eigen::Index m = prog_.num_rows();
    b_mat_.resize(m, lay_.nvar);
    for (std::size_t bi = 0; bi < prog_.cones.size(); ++bi) {
        const ConeBlock& blk = prog_.cones[bi];
        const int o = lay_.offset[bi];
        if (blk.type == ConeType::NonNeg) {
            for (int j = 0; j < blk.dim; ++j) {
                b_mat_.col(o + j).setZero();
                for (Eigen::SparseMatrix<double>::InnerIterator it(prog_.eq_matrix, o + j); it;
                     ++it) {
                    b_mat_(it.row(), o + j) = scal_.diag(o + j) * it.value();
                }
            }
        } else {
            // B_block = A_block * eta * [ a q' ; q I + qq'/(1+a) ]
            const int d = blk.dim;
            const Eigen::VectorXd& wb = scal_.wbar[bi];
            const double a = wb(0);
            const double eta = scal_.eta[bi];
            Eigen::VectorXd g0 = Eigen::VectorXd::Zero(m);   // A e0
            Eigen::VectorXd gq = Eigen::VectorXd::Zero(m);   // A (0, q)
            for (Eigen::SparseMatrix<double>::InnerIterator it(prog_.eq_matrix, o); it; ++it) {
                g0(it.row()) = it.value();
            }
            for (int j = 1; j < d; ++j) {
                for (Eigen::SparseMatrix<double>::InnerIterator it(prog_.eq_matrix, o + j); it;
                     ++it) {
                    gq(it.row()) += wb(j) * it.value();
                }
            }
            b_mat_.col(o) = eta * (a * g0 + gq);
            const Eigen::VectorXd h = eta * (g0 + gq / (1.0 + a));
            for (int j = 1; j < d; ++j) {
                b_mat_.col(o + j) = wb(j) * h;
                for (Eigen::SparseMatrix<double>::InnerIterator it(prog_.eq_matrix, o + j); it;
                     ++it) {
                    b_mat_(it.row(), o + j) += eta * it.value();
                }
            }
        }
    }
    m_.resize(m, m);
    m_.setZero();
    m_.selfadjointView<Eigen::Lower>().rankUpdate(b_mat_);
    double delta = 1e-12 * std::max(1.0, m_.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd reg = m_;
        reg.diagonal().array() += delta;
        llt_.compute(reg.selfadjointView<Eigen::Lower>());
        if (llt_.info() == Eigen::Success) {
            m_ = reg;
            return true;
        }
        delta *= 1e3;
    }
    return false;
}

Eigen::VectorXd HsdSolver::solve_normal(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd z = llt_.solve(rhs);
    Eigen::VectorXd r = rhs - m_.selfadjointView<Eigen::Lower>() * z;
    if (r.lpNorm<Eigen::Infinity>() > 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) {
        z += llt_.solve(r);
    }
    return z;
}

HsdSolver::IterCtx HsdSolver::make_ctx() const {
    IterCtx ctx;
    ctx.w2c = apply_w2(prog_.objective);
    ctx.aw2c = prog_.eq_matrix * ctx.w2c;
    ctx.g2 = solve_normal(ctx.aw2c + prog_.eq_rhs);
    ctx.v = ctx.aw2c - prog_.eq_rhs;
    ctx.cw2c = prog_.objective.dot(ctx.w2c);
    return ctx;
}

HsdSolver::Direction HsdSolver::solve_linearized(const IterCtx& ctx, const Rhs& rhs,
                                                 const HsdState& st) const {
    const Eigen::VectorXd dtil = jdiv(prog_, lay_, lambda_, rhs.rs);
    const Eigen::VectorXd w_dtil = apply_w(dtil);
    const Eigen::VectorXd w2r2 = apply_w2(rhs.r2);

    const Eigen::VectorXd rhs1 =
        rhs.r1 - prog_.eq_matrix * w2r2 - prog_.eq_matrix * w_dtil;
    const Eigen::VectorXd g1 = solve_normal(rhs1);

    const double rhs2 = rhs.r3 - prog_.objective.dot(w2r2) -
                        prog_.objective.dot(w_dtil) - rhs.rk / st.tau;
    const double denom = ctx.v.dot(ctx.g2) - ctx.cw2c - st.kap / st.tau;

    Direction dir;
    dir.dtau = (rhs2 - ctx.v.dot(g1)) / denom;
    dir.dy = g1 + dir.dtau * ctx.g2;
    dir.ds = -(At_ * dir.dy) + dir.dtau * prog_.objective - rhs.r2;
    dir.dx = apply_w2(At_ * dir.dy - dir.dtau * prog_.objective - rhs.r2) + w_dtil;
    dir.dkap = (rhs.rk - st.kap * dir.dtau) / st.tau;
    return dir;
}

HsdSolver::Rhs HsdSolver::residual_of(const Direction& dir, const Rhs& rhs,
                                      const HsdState& st) const {
    Rhs res;
    res.r1 = rhs.r1 - (prog_.eq_matrix * dir.dx - prog_.eq_rhs * dir.dtau);
    res.r2 = rhs.r2 - (-(At_ * dir.dy) + prog_.objective * dir.dtau - dir.ds);
    res.r3 = rhs.r3 - (prog_.objective.dot(dir.dx) - prog_.eq_rhs.dot(dir.dy) + dir.dkap);
    res.rs = rhs.rs - jprod(prog_, lay_, lambda_, apply_w_inv(dir.dx) + apply_w(dir.ds));
    res.rk = rhs.rk - (st.tau * dir.dkap + st.kap * dir.dtau);
    return res;
}

HsdSolver::Direction HsdSolver::direction(const IterCtx& ctx, double eta,
                                          const Eigen::VectorXd& ds_rhs, double dkap_rhs,
                                          const HsdState& st) const {
    Rhs rhs;
    rhs.r1 = -eta * rp_;
    rhs.r2 = -eta * rd_;
    rhs.r3 = -eta * rg_;
    rhs.rs = ds_rhs;
    rhs.rk = dkap_rhs;

    Direction dir = solve_linearized(ctx, rhs, st);
    // Refine at the full-system level: the W^2 reconstruction of dx amplifies
    // normal-equation roundoff once the scalings become ill conditioned.
    const double target = std::max({rhs.r1.lpNorm<Eigen::Infinity>(),
                                    rhs.r2.lpNorm<Eigen::Infinity>(),
                                    rhs.rs.lpNorm<Eigen::Infinity>(),
                                    std::abs(rhs.r3), std::abs(rhs.rk), 1.0});
    for (int pass = 0; pass < 3; ++pass) {
        Rhs res = residual_of(dir, rhs, st);
        const double err = std::max({res.r1.lpNorm<Eigen::Infinity>(),
                                     res.r2.lpNorm<Eigen::Infinity>(),
                                     res.rs.lpNorm<Eigen::Infinity>(),
                                     std::abs(res.r3), std::abs(res.rk)});
        if (!std::isfinite(err) || err <= 1e-12 * target) break;
        Direction corr = solve_linearized(ctx, res, st);
        dir.dx += corr.dx;
        dir.dy += corr.dy;
        dir.ds += corr.ds;
        dir.dtau += corr.dtau;
        dir.dkap += corr.dkap;
    }

#ifdef CRAN_CONIC_DEBUG
    {
        Rhs res = residual_of(dir, rhs, st);
        fprintf(stderr, "   dir eta=%5.2f |F1|=%9.2e |F2|=%9.2e |F3|=%9.2e |C|=%9.2e |K|=%9.2e\n",
                eta, res.r1.norm(), res.r2.norm(), std::abs(res.r3), res.rs.norm(),
                std::abs(res.rk));
    }
#endif
    return dir;
}

ConeSolution HsdSolver::run() {
    ConeSolution sol;
    const Eigen::Index n = lay_.nvar;
    const Eigen::Index m = prog_.num_rows();

    HsdState st;
    st.x = ident_;
    st.s = ident_;
    st.y = Eigen::VectorXd::Zero(m);

    // Least-squares initial point, pushed into the cone interior.
    {
        compute_scaling(st.x, st.s);  // identity scaling
        if (!factorize()) {
            sol.status = SolveStatus::NumericalFailure;
            return sol;
        }
        Eigen::VectorXd xls = At_ * solve_normal(prog_.eq_rhs);
        Eigen::VectorXd yls = solve_normal(prog_.eq_matrix * prog_.objective);
        Eigen::VectorXd sls = prog_.objective - At_ * yls;
        if (xls.allFinite() && yls.allFinite() && sls.allFinite()) {
            bring_to_cone(prog_, lay_, xls);
            bring_to_cone(prog_, lay_, sls);
            st.x = xls;
            st.y = yls;
            st.s = sls;
        }
    }

    const double tol = opts_.tol;
    for (int iter = 0; iter <= opts_.max_iter; ++iter) {
        sol.iterations = iter;

        rp_ = prog_.eq_matrix * st.x - prog_.eq_rhs * st.tau;
        rd_ = -(At_ * st.y) + prog_.objective * st.tau - st.s;
        const double cx = prog_.objective.dot(st.x);
        const double by = prog_.eq_rhs.dot(st.y);
        rg_ = cx - by + st.kap;
        const double mu = (st.x.dot(st.s) + st.tau * st.kap) / (lay_.degree + 1);

        if (!std::isfinite(mu) || !rp_.allFinite() || !rd_.allFinite()) {
            sol.status = SolveStatus::NumericalFailure;
            return sol;
        }

        const double pobj = cx / st.tau;
        const double dobj = by / st.tau;
        const double pres = (rp_ / st.tau).norm() / (1.0 + bnorm_);
        const double dres = (rd_ / st.tau).norm() / (1.0 + cnorm_);
        const double gap = std::abs(pobj - dobj);

#ifdef CRAN_CONIC_DEBUG
        fprintf(stderr,
                "it=%2d mu=%9.2e pres=%9.2e dres=%9.2e gap=%9.2e tau=%9.2e kap=%9.2e\n",
                iter, mu, pres, dres, gap, st.tau, st.kap);
#endif

        if (pres <= tol && dres <= tol && gap <= tol * (1.0 + std::abs(pobj))) {
            sol.status = SolveStatus::Optimal;
            sol.x = st.x / st.tau;
            sol.y = st.y / st.tau;
            sol.s = st.s / st.tau;
            sol.primal_obj = pobj;
            sol.dual_obj = dobj;
            return sol;
        }
        if (st.tau < st.kap) {
            if (by > 0.0) {
                Eigen::VectorXd yc = st.y / by;
                Eigen::VectorXd sc = st.s / by;
                const double res = (At_ * yc + sc).lpNorm<Eigen::Infinity>();
                if (res <= tol * a_inf_ * std::max(1.0, yc.lpNorm<Eigen::Infinity>())) {
                    sol.status = SolveStatus::PrimalInfeasible;
                    sol.x = Eigen::VectorXd::Zero(n);
                    sol.y = yc;
                    sol.s = sc;
                    return sol;
                }
            }
            if (cx < 0.0) {
                Eigen::VectorXd xc = st.x / (-cx);
                const double res = (prog_.eq_matrix * xc).lpNorm<Eigen::Infinity>();
                if (res <= tol * a_inf_ * std::max(1.0, xc.lpNorm<Eigen::Infinity>())) {
                    sol.status = SolveStatus::DualInfeasible;
                    sol.x = xc;
                    sol.y = Eigen::VectorXd::Zero(m);
                    sol.s = Eigen::VectorXd::Zero(n);
                    return sol;
                }
            }
        }
        if (iter == opts_.max_iter) break;

        compute_scaling(st.x, st.s);
        if (!factorize()) {
            sol.status = SolveStatus::NumericalFailure;
            return sol;
        }
        const IterCtx ctx = make_ctx();

        // Predictor.
        const Eigen::VectorXd minus_ll = -jprod(prog_, lay_, lambda_, lambda_);
        const Direction aff = direction(ctx, 1.0, minus_ll, -st.tau * st.kap, st);
        double alpha_aff = std::min({max_step(prog_, lay_, st.x, aff.dx),
                                     max_step(prog_, lay_, st.s, aff.ds),
                                     aff.dtau < 0 ? -st.tau / aff.dtau : kHuge,
                                     aff.dkap < 0 ? -st.kap / aff.dkap : kHuge});
        alpha_aff = std::min(opts_.step_fraction * alpha_aff, 1.0);
        // Mehrotra centering from the realized affine complementarity, with a
        // boost when the iterate has drifted off-center (smallest product far
        // below mu), so the next step restores centrality instead of pushing
        // further into the boundary.
        const double mu_aff = ((st.x + alpha_aff * aff.dx).dot(st.s + alpha_aff * aff.ds) +
                               (st.tau + alpha_aff * aff.dtau) * (st.kap + alpha_aff * aff.dkap)) /
                              (lay_.degree + 1);
        const double ratio_now =
            min_product_eig(prog_, lay_, st.x, st.s, st.tau, st.kap) / mu;
        double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 1e-8, 0.999);
        if (ratio_now < 0.05) sigma = std::max(sigma, 0.5);
        if (ratio_now < 0.005) sigma = std::max(sigma, 0.9);

        // Corrector.
        const Eigen::VectorXd ds_rhs =
            sigma * mu * ident_ + minus_ll -
            jprod(prog_, lay_, apply_w_inv(aff.dx), apply_w(aff.ds));
        const double dkap_rhs = sigma * mu - st.tau * st.kap - aff.dtau * aff.dkap;
        const Direction dir = direction(ctx, 1.0 - sigma, ds_rhs, dkap_rhs, st);

        double alpha = std::min({max_step(prog_, lay_, st.x, dir.dx),
                                 max_step(prog_, lay_, st.s, dir.ds),
                                 dir.dtau < 0 ? -st.tau / dir.dtau : kHuge,
                                 dir.dkap < 0 ? -st.kap / dir.dkap : kHuge});
        alpha = std::min(opts_.step_fraction * alpha, 1.0);
        if (!std::isfinite(alpha) || alpha <= 0.0) {
            sol.status = SolveStatus::NumericalFailure;
            return sol;
        }
        // Centrality brake: each complementarity product may lag the average
        // by at most a fixed factor, relative to where the iterate already
        // is. Prevents a single product from collapsing many orders below mu.
        {
            const double floor_ratio = std::min(1e-3, 0.5 * ratio_now);
            for (int bt = 0; bt < 30; ++bt) {
                const Eigen::VectorXd xc = st.x + alpha * dir.dx;
                const Eigen::VectorXd sc = st.s + alpha * dir.ds;
                const double tauc = st.tau + alpha * dir.dtau;
                const double kapc = st.kap + alpha * dir.dkap;
                const double mu_c = (xc.dot(sc) + tauc * kapc) / (lay_.degree + 1);
                if (mu_c > 0.0 &&
                    min_product_eig(prog_, lay_, xc, sc, tauc, kapc) >= floor_ratio * mu_c)
                    break;
                alpha *= 0.8;
            }
        }

#ifdef CRAN_CONIC_DEBUG
        fprintf(stderr,
                "   step a_aff=%6.4f sigma=%8.2e a=%8.2e dtau=%9.2e ratio_now=%9.2e "
                "|dx|=%9.2e |ds|=%9.2e\n",
                alpha_aff, sigma, alpha, dir.dtau,
                min_product_eig(prog_, lay_, st.x, st.s, st.tau, st.kap) / mu, dir.dx.norm(),
                dir.ds.norm());
#endif
        st.x += alpha * dir.dx;
        st.y += alpha * dir.dy;
        st.s += alpha * dir.ds;
        st.tau += alpha * dir.dtau;
        st.kap += alpha * dir.dkap;

        // The embedding is homogeneous: rescale so max(tau, kappa) = 1 to
        // keep the normal equations well conditioned.
        const double scale = 1.0 / std::max(st.tau, st.kap);
        st.x *= scale;
        st.y *= scale;
        st.s *= scale;
        st.tau *= scale;
        st.kap *= scale;
    }

    sol.status = SolveStatus::MaxIterations;
    sol.x = st.x / st.tau;
    sol.y = st.y / st.tau;
    sol.s = st.s / st.tau;
    sol.primal_obj = prog_.objective.dot(sol.x);
    sol.dual_obj = prog_.eq_rhs.dot(sol.y);
    return sol;
}

}  // namespace

void ConeProgram::validate() const {
    Eigen::Index total = 0;
    for (const ConeBlock& blk : cones) {
        if (blk.dim < 1) throw std::invalid_argument("cone block with dim < 1");
        total += blk.dim;
    }
    if (total != objective.size())
        throw std::invalid_argument("cone dims do not cover the variable vector");
    if (eq_matrix.cols() != objective.size())
        throw std::invalid_argument("eq_matrix column count != variable count");
    if (eq_matrix.rows() != eq_rhs.size())
        throw std::invalid_argument("eq_matrix row count != rhs size");
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::PrimalInfeasible: return "primal_infeasible";
        case SolveStatus::DualInfeasible: return "dual_infeasible";
        case SolveStatus::MaxIterations: return "max_iterations";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

ConeSolution solve(const ConeProgram& prog, const SolverOptions& opts) {
    prog.validate();

    // Presolve scaling: unit-infinity-norm equality rows and a normalized
    // objective. Row scaling is transparent to the cones; both are undone on
    // the returned solution and certificates.
    const Eigen::Index m = prog.num_rows();
    ConeProgram scaled = prog;
    Eigen::VectorXd row_scale = Eigen::VectorXd::Ones(m);
    for (int k = 0; k < scaled.eq_matrix.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled.eq_matrix, k); it; ++it) {
            row_scale(it.row()) = std::max(row_scale(it.row()), std::abs(it.value()));
        }
    }
    for (int k = 0; k < scaled.eq_matrix.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled.eq_matrix, k); it; ++it) {
            it.valueRef() /= row_scale(it.row());
        }
    }
    scaled.eq_rhs = prog.eq_rhs.cwiseQuotient(row_scale);
    const double c_scale = std::max(1.0, prog.objective.lpNorm<Eigen::Infinity>());
    scaled.objective = prog.objective / c_scale;

    HsdSolver solver(scaled, opts);
    ConeSolution sol = solver.run();

    switch (sol.status) {
        case SolveStatus::Optimal:
        case SolveStatus::MaxIterations:
            sol.y = c_scale * sol.y.cwiseQuotient(row_scale);
            sol.s *= c_scale;
            sol.primal_obj *= c_scale;
            sol.dual_obj *= c_scale;
            break;
        case SolveStatus::PrimalInfeasible: {
            sol.y = sol.y.cwiseQuotient(row_scale);
            const double by = prog.eq_rhs.dot(sol.y);
            sol.y /= by;
            sol.s /= by;
            break;
        }
        case SolveStatus::DualInfeasible:
            // c' x = -1 is restored under the objective scaling.
            break;
        case SolveStatus::NumericalFailure:
            break;
    }
    return sol;
}

}  // namespace cran::conic
