#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cran {

// Real embedding of complex vectors used by all cone programs.
//
// A complex vector w in C^n maps to x in R^{2n} with interleaved layout
// (Re w_0, Im w_0, Re w_1, Im w_1, ...). The layout keeps per-link complex
// sub-blocks contiguous in the real vector and preserves the Euclidean norm:
// ||embed(w)|| == ||w||.

inline Eigen::VectorXd embed(const Eigen::VectorXcd& w) {
    Eigen::VectorXd x(2 * w.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        x(2 * j) = w(j).real();
        x(2 * j + 1) = w(j).imag();
    }
    return x;
}

inline Eigen::VectorXcd lift(const Eigen::VectorXd& x) {
    Eigen::VectorXcd w(x.size() / 2);
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        w(j) = std::complex<double>(x(2 * j), x(2 * j + 1));
    }
    return w;
}

// Row vector r such that r * embed(w) == Re{a^H w}.
inline Eigen::RowVectorXd real_inner_row(const Eigen::VectorXcd& a) {
    Eigen::RowVectorXd r(2 * a.size());
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        r(2 * j) = a(j).real();
        r(2 * j + 1) = a(j).imag();
    }
    return r;
}

// Row vector r such that r * embed(w) == Im{a^H w}.
inline Eigen::RowVectorXd imag_inner_row(const Eigen::VectorXcd& a) {
    Eigen::RowVectorXd r(2 * a.size());
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        r(2 * j) = -a(j).imag();
        r(2 * j + 1) = a(j).real();
    }
    return r;
}

}  // namespace cran
