#pragma once

#include <Eigen/Dense>

#include "ellab/error.hpp"

namespace ellab {

/// Constant k x k coefficient matrices of the elliptic operator
/// a(eps^2 d_t^2 u + Delta_x u) - gamma d_t u.
/// Requires a + a^T > 0 and gamma = gamma^T > 0.
struct CouplingMatrices {
    int k = 1;
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(1, 1);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Identity(1, 1);

    CouplingMatrices() = default;
    CouplingMatrices(Eigen::MatrixXd a_, Eigen::MatrixXd gamma_)
        : k(static_cast<int>(a_.rows())), a(std::move(a_)), gamma(std::move(gamma_)) {
        validate();
    }

    static CouplingMatrices identity(int k) {
        return {Eigen::MatrixXd::Identity(k, k), Eigen::MatrixXd::Identity(k, k)};
    }

    static CouplingMatrices scalar(double a, double gamma) {
        return {Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Constant(1, 1, gamma)};
    }

    [[nodiscard]] Eigen::MatrixXd a_plus() const { return 0.5 * (a + a.transpose()); }
    [[nodiscard]] Eigen::MatrixXd a_minus() const { return 0.5 * (a - a.transpose()); }
    [[nodiscard]] bool a_symmetric(double tol = 1e-14) const {
        return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + a.cwiseAbs().maxCoeff());
    }

    void validate() const {
        require(k >= 1 && a.rows() == k && a.cols() == k && gamma.rows() == k && gamma.cols() == k,
                ErrorCode::ShapeMismatch, "coupling matrices must be k x k");
        require(a.allFinite() && gamma.allFinite(), ErrorCode::NonFiniteValue, "coupling matrices not finite");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ap(a_plus());
        require(ap.eigenvalues().minCoeff() > 0.0, ErrorCode::InvalidArgument, "a + a^T must be positive definite");
        require((gamma - gamma.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + gamma.cwiseAbs().maxCoeff()),
                ErrorCode::InvalidArgument, "gamma must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(gamma);
        require(gs.eigenvalues().minCoeff() > 0.0, ErrorCode::InvalidArgument, "gamma must be positive definite");
    }
};

/// Smallest eigenvalue of the symmetric part of
///   Lambda0 gamma - eps^2 Lambda0^2 (a+ - 2 a- a+^{-1} a-) - K I.
/// A nonnegative value means the exponent Lambda0 is admissible for the
/// weighted linear estimate; the solvers never consult it.
inline double exponent_condition_margin(const CouplingMatrices& m, double lambda0, double k_mono, double eps) {
    const Eigen::MatrixXd ap = m.a_plus();
    const Eigen::MatrixXd am = m.a_minus();
    const Eigen::MatrixXd inner = ap - 2.0 * am * ap.inverse() * am;
    Eigen::MatrixXd expr = lambda0 * m.gamma - eps * eps * lambda0 * lambda0 * inner -
                           k_mono * Eigen::MatrixXd::Identity(m.k, m.k);
    expr = 0.5 * (expr + expr.transpose()).eval();
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(expr).eigenvalues().minCoeff();
}

} // namespace ellab
