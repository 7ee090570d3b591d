#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ellab/error.hpp"

namespace ellab {

/// Interaction function f: R^k -> R^k with its Jacobian, an optional
/// potential F (f = grad F), and the constants of the structural bounds
///   f(v).v >= -c_diss,   f'(v) >= -k_mono,   |f(v)| <= C(1 + |v|^growth_q).
struct Nonlinearity {
    using VecFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
    using MatFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
    using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

    int k = 1;
    VecFn f;
    MatFn jac_f;
    std::optional<ScalarFn> potential_F;
    double c_diss = 0.0;
    double k_mono = 0.0;
    double growth_q = 1.0;
    /// f(-v) = -f(v)
    bool odd = false;
    std::string label;

    // Optional scalar fast path for k = 1.
    std::function<double(double)> f1;
    std::function<double(double)> df1;

    [[nodiscard]] bool has_potential() const noexcept { return potential_F.has_value(); }

    /// Applies f node-wise to an n x k block of values.
    [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& u) const {
        Eigen::MatrixXd out(u.rows(), u.cols());
        if (k == 1 && f1) {
            for (Eigen::Index j = 0; j < u.rows(); ++j) out(j, 0) = f1(u(j, 0));
            return out;
        }
        Eigen::VectorXd v(k);
        for (Eigen::Index j = 0; j < u.rows(); ++j) {
            v = u.row(j).transpose();
            out.row(j) = f(v).transpose();
        }
        return out;
    }

    /// Jacobian at node j of an n x k block, written into jac (k x k).
    void jacobian_at(const Eigen::MatrixXd& u, Eigen::Index j, Eigen::MatrixXd& jac) const {
        if (k == 1 && df1) {
            jac.resize(1, 1);
            jac(0, 0) = df1(u(j, 0));
            return;
        }
        jac = jac_f(u.row(j).transpose());
    }
};

inline Nonlinearity zero_nonlinearity(int k = 1) {
    Nonlinearity nl;
    nl.k = k;
    nl.f = [k](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(k); };
    nl.jac_f = [k](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(k, k); };
    nl.potential_F = [](const Eigen::VectorXd&) { return 0.0; };
    nl.odd = true;
    nl.label = "zero";
    if (k == 1) {
        nl.f1 = [](double) { return 0.0; };
        nl.df1 = [](double) { return 0.0; };
    }
    return nl;
}

/// f(u) = c u (componentwise), potential c|u|^2/2.
inline Nonlinearity linear_nonlinearity(double c, int k = 1) {
    Nonlinearity nl;
    nl.k = k;
    nl.f = [c](const Eigen::VectorXd& v) { return Eigen::VectorXd(c * v); };
    nl.jac_f = [c, k](const Eigen::VectorXd&) { return Eigen::MatrixXd(c * Eigen::MatrixXd::Identity(k, k)); };
    nl.potential_F = [c](const Eigen::VectorXd& v) { return 0.5 * c * v.squaredNorm(); };
    nl.c_diss = 0.0;
    nl.k_mono = std::max(0.0, -c);
    // f.v = c|v|^2 is bounded below only for c >= 0.
    if (c < 0.0) nl.c_diss = std::numeric_limits<double>::infinity();
    nl.growth_q = 1.0;
    nl.odd = true;
    nl.label = "linear";
    if (k == 1) {
        nl.f1 = [c](double u) { return c * u; };
        nl.df1 = [c](double) { return c; };
    }
    return nl;
}

/// Chafee-Infante interaction f(u) = u^3 - lambda u, applied componentwise.
/// F(u) = |u|^4/4 - lambda |u|^2 / 2 (componentwise sums).
inline Nonlinearity chafee_infante(double lambda, int k = 1) {
    Nonlinearity nl;
    nl.k = k;
    nl.f = [lambda](const Eigen::VectorXd& v) {
        return Eigen::VectorXd(v.array().cube() - lambda * v.array());
    };
    nl.jac_f = [lambda](const Eigen::VectorXd& v) {
        return Eigen::MatrixXd((3.0 * v.array().square() - lambda).matrix().asDiagonal());
    };
    nl.potential_F = [lambda](const Eigen::VectorXd& v) {
        return (0.25 * v.array().pow(4) - 0.5 * lambda * v.array().square()).sum();
    };
    // min over v of v^4 - lambda v^2 is -lambda^2/4 per component.
    nl.c_diss = lambda > 0.0 ? k * lambda * lambda / 4.0 : 0.0;
    nl.k_mono = std::max(0.0, lambda);
    nl.growth_q = 3.0;
    nl.odd = true;
    nl.label = "chafee_infante";
    if (k == 1) {
        nl.f1 = [lambda](double u) { return u * u * u - lambda * u; };
        nl.df1 = [lambda](double u) { return 3.0 * u * u - lambda; };
    }
    return nl;
}

/// Gradient system of two components coupled through F = (u1^2 + u2^2)^2/4 - lambda (u1^2+u2^2)/2 + c u1 u2.
inline Nonlinearity coupled_cubic_pair(double lambda, double coupling) {
    Nonlinearity nl;
    nl.k = 2;
    nl.f = [lambda, coupling](const Eigen::VectorXd& v) {
        const double r2 = v.squaredNorm();
        Eigen::VectorXd out(2);
        out(0) = r2 * v(0) - lambda * v(0) + coupling * v(1);
        out(1) = r2 * v(1) - lambda * v(1) + coupling * v(0);
        return out;
    };
    nl.jac_f = [lambda, coupling](const Eigen::VectorXd& v) {
        const double r2 = v.squaredNorm();
        Eigen::MatrixXd j(2, 2);
        j(0, 0) = r2 + 2.0 * v(0) * v(0) - lambda;
        j(1, 1) = r2 + 2.0 * v(1) * v(1) - lambda;
        j(0, 1) = 2.0 * v(0) * v(1) + coupling;
        j(1, 0) = j(0, 1);
        return j;
    };
    nl.potential_F = [lambda, coupling](const Eigen::VectorXd& v) {
        const double r2 = v.squaredNorm();
        return 0.25 * r2 * r2 - 0.5 * lambda * r2 + coupling * v(0) * v(1);
    };
    const double mu = lambda + std::abs(coupling);
    nl.c_diss = mu * mu / 4.0;
    nl.k_mono = mu;
    nl.growth_q = 3.0;
    nl.odd = true;
    nl.label = "coupled_cubic_pair";
    return nl;
}

struct NonlinearityReport {
    double min_dissipation_margin = 0.0;            // min f(v).v + c_diss
    double min_monotonicity_margin = 0.0;           // min eig(sym f'(v)) + k_mono
    std::optional<double> max_derivative_mismatch;  // FD gradient/Jacobian consistency
    bool passed = false;
};

/// Worst-case margins of the structural assumptions over the given samples.
inline NonlinearityReport check_nonlinearity(const Nonlinearity& nl, const std::vector<Eigen::VectorXd>& samples,
                                             double tol = 1e-8) {
    require(!samples.empty(), ErrorCode::InvalidArgument, "check_nonlinearity needs samples");
    NonlinearityReport rep;
    rep.min_dissipation_margin = std::numeric_limits<double>::infinity();
    rep.min_monotonicity_margin = std::numeric_limits<double>::infinity();
    double mismatch = 0.0;
    for (const auto& v : samples) {
        require(v.size() == nl.k && v.allFinite(), ErrorCode::InvalidArgument, "sample has wrong size or is not finite");
        const Eigen::VectorXd fv = nl.f(v);
        const Eigen::MatrixXd jv = nl.jac_f(v);
        require(fv.allFinite() && jv.allFinite(), ErrorCode::NonFiniteValue, "f or f' returned non-finite values");
        rep.min_dissipation_margin = std::min(rep.min_dissipation_margin, fv.dot(v) + nl.c_diss);
        const Eigen::MatrixXd sym = 0.5 * (jv + jv.transpose());
        const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff();
        rep.min_monotonicity_margin = std::min(rep.min_monotonicity_margin, lmin + nl.k_mono);
        if (nl.potential_F) {
            for (int c = 0; c < nl.k; ++c) {
                const double step = 1e-6 * std::max(1.0, std::abs(v(c)));
                Eigen::VectorXd vp = v, vm = v;
                vp(c) += step;
                vm(c) -= step;
                const double dF = ((*nl.potential_F)(vp) - (*nl.potential_F)(vm)) / (2.0 * step);
                const Eigen::VectorXd df = (nl.f(vp) - nl.f(vm)) / (2.0 * step);
                const double scale = 1.0 + fv.cwiseAbs().maxCoeff();
                mismatch = std::max(mismatch, std::abs(dF - fv(c)) / scale);
                mismatch = std::max(mismatch, (df - jv.col(c)).cwiseAbs().maxCoeff() / (1.0 + jv.cwiseAbs().maxCoeff()));
            }
        }
    }
    if (nl.potential_F) rep.max_derivative_mismatch = mismatch;
    rep.passed = rep.min_dissipation_margin >= -tol && rep.min_monotonicity_margin >= -tol &&
                 (!rep.max_derivative_mismatch || *rep.max_derivative_mismatch <= tol);
    return rep;
}

} // namespace ellab
