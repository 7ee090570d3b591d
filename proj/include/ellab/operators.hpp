#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ellab/coupling.hpp"
#include "ellab/error.hpp"
#include "ellab/field.hpp"

namespace ellab {

/// Three-point Dirichlet Laplacian of an n x k block on spacing h.
inline Eigen::MatrixXd laplacian(const Eigen::MatrixXd& u, double h) {
    const Eigen::Index n = u.rows();
    Eigen::MatrixXd out(n, u.cols());
    const double s = 1.0 / (h * h);
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double left = j > 0 ? u(j - 1, c) : 0.0;
            const double right = j + 1 < n ? u(j + 1, c) : 0.0;
            out(j, c) = s * (left - 2.0 * u(j, c) + right);
        }
    }
    return out;
}

inline Field laplacian(const Field& u) { return Field(u.grid(), laplacian(u.values(), u.grid().h())); }

/// Sum over the n+1 cells of h |(u_{j+1} - u_j)/h|^2 with zero end values,
/// i.e. the squared discrete L2 norm of the gradient.
inline double gradient_norm_sq(const Eigen::MatrixXd& u, double h) {
    const Eigen::Index n = u.rows();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        double prev = 0.0;
        for (Eigen::Index j = 0; j <= n; ++j) {
            const double cur = j < n ? u(j, c) : 0.0;
            acc += (cur - prev) * (cur - prev);
            prev = cur;
        }
    }
    return acc / h;
}

/// Trapezoid integral in x of |w|^p where w is known on interior nodes and
/// linearly extrapolated to the end points.
inline double interior_lp_integral(const Eigen::MatrixXd& w, double h, double p) {
    const Eigen::Index n = w.rows();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index j = 0; j < n; ++j) acc += h * std::pow(std::abs(w(j, c)), p);
        if (n >= 2) {
            const double left = 2.0 * w(0, c) - w(1, c);
            const double right = 2.0 * w(n - 1, c) - w(n - 2, c);
            acc += 0.5 * h * (std::pow(std::abs(left), p) + std::pow(std::abs(right), p));
        }
    }
    return acc;
}

/// Trapezoid integral in x of |w|^p for a grid function vanishing at both ends.
inline double dirichlet_lp_integral(const Eigen::MatrixXd& w, double h, double p) {
    return h * w.array().abs().pow(p).sum();
}

/// a(eps^2 d_t^2 u + Delta_x u) - gamma d_t u with central differences.
/// The first and last time slices carry no stencil and are returned as zero.
inline CylinderField apply_elliptic_operator(const CylinderField& u, const CouplingMatrices& mats) {
    require(mats.k == u.k(), ErrorCode::ShapeMismatch, "coupling matrices do not match the field components");
    require(u.m_steps() >= 2, ErrorCode::InvalidArgument, "elliptic operator needs m_steps >= 2");
    const double dt = u.cgrid().dt();
    const double e2 = u.cgrid().eps() * u.cgrid().eps();
    const double h = u.sgrid().h();
    CylinderField out(u.sgrid(), u.cgrid(), u.k());
    const Eigen::MatrixXd at = mats.a.transpose();
    const Eigen::MatrixXd gt = mats.gamma.transpose();
    for (int i = 1; i < u.m_steps(); ++i) {
        const Eigen::MatrixXd utt = (u.at(i + 1) - 2.0 * u.at(i) + u.at(i - 1)) / (dt * dt);
        const Eigen::MatrixXd ut = (u.at(i + 1) - u.at(i - 1)) / (2.0 * dt);
        out.at(i) = (e2 * utt + laplacian(u.at(i), h)) * at - ut * gt;
    }
    return out;
}

/// Overload that also checks the field against declared grids.
inline CylinderField apply_elliptic_operator(const CylinderField& u, const CouplingMatrices& mats,
                                             const SpatialGrid& sgrid, const CylinderGrid& cgrid) {
    require(u.sgrid() == sgrid && u.cgrid() == cgrid, ErrorCode::ShapeMismatch,
            "field grids disagree with the declared grids");
    return apply_elliptic_operator(u, mats);
}

namespace detail {

/// Second-order first and second time derivatives at node i of a cylinder field.
inline void time_derivatives(const CylinderField& u, int i, Eigen::MatrixXd& ut, Eigen::MatrixXd& utt) {
    const int m = u.m_steps();
    const double dt = u.cgrid().dt();
    if (i == 0) {
        ut = (-3.0 * u.at(0) + 4.0 * u.at(1) - u.at(2)) / (2.0 * dt);
        utt = (2.0 * u.at(0) - 5.0 * u.at(1) + 4.0 * u.at(2) - u.at(3)) / (dt * dt);
    } else if (i == m) {
        ut = (3.0 * u.at(m) - 4.0 * u.at(m - 1) + u.at(m - 2)) / (2.0 * dt);
        utt = (2.0 * u.at(m) - 5.0 * u.at(m - 1) + 4.0 * u.at(m - 2) - u.at(m - 3)) / (dt * dt);
    } else {
        ut = (u.at(i + 1) - u.at(i - 1)) / (2.0 * dt);
        utt = (u.at(i + 1) - 2.0 * u.at(i) + u.at(i - 1)) / (dt * dt);
    }
}

} // namespace detail

/// Discrete norm on the unit slab (T, T+1):
///   eps^2 ||d_t^2 u||_p + ||d_t u||_p + ||u||_{L^p(W^{2,p})},
/// with ||v||_{W^{2,p}} taken as ||v||_p + ||Delta_x v||_p and trapezoid
/// quadrature in t and x. Slab ends snap to the nearest time nodes.
inline double weighted_norm(const CylinderField& u, double p, double slab_start) {
    require(p >= 2.0, ErrorCode::InvalidArgument, "weighted_norm needs p >= 2");
    require(u.m_steps() >= 3, ErrorCode::InvalidArgument, "weighted_norm needs m_steps >= 3");
    const auto& cg = u.cgrid();
    const double tol = 1e-9 * std::max(1.0, std::abs(slab_start));
    require(slab_start >= cg.tau() - tol && slab_start + 1.0 <= cg.t_end() + tol, ErrorCode::SlabOutOfRange,
            "slab [T, T+1] is not contained in the cylinder");
    const int i0 = static_cast<int>(std::lround((slab_start - cg.tau()) / cg.dt()));
    const int i1 = std::min(cg.m_steps(), static_cast<int>(std::lround((slab_start + 1.0 - cg.tau()) / cg.dt())));
    require(i1 > i0, ErrorCode::SlabOutOfRange, "slab shorter than one time step");
    const double h = u.sgrid().h();
    const double dt = cg.dt();
    const double e2 = cg.eps() * cg.eps();

    double i_utt = 0.0, i_ut = 0.0, i_u = 0.0, i_lap = 0.0;
    Eigen::MatrixXd ut, utt;
    for (int i = i0; i <= i1; ++i) {
        const double w = (i == i0 || i == i1) ? 0.5 * dt : dt;
        detail::time_derivatives(u, i, ut, utt);
        if (e2 > 0.0) i_utt += w * dirichlet_lp_integral(utt, h, p);
        i_ut += w * dirichlet_lp_integral(ut, h, p);
        i_u += w * dirichlet_lp_integral(u.at(i), h, p);
        i_lap += w * interior_lp_integral(laplacian(u.at(i), h), h, p);
    }
    const double inv = 1.0 / p;
    return e2 * std::pow(i_utt, inv) + std::pow(i_ut, inv) + std::pow(i_u, inv) + std::pow(i_lap, inv);
}

/// ||u0||_{L2} + ||grad u0||_{L2} + eps ||Delta u0||_{L2}; stands in for the
/// eps-uniform trace norm.
inline double surrogate_v_norm(const Field& u0, double eps) {
    require(u0.values().allFinite(), ErrorCode::NonFiniteValue, "surrogate norm of non-finite field");
    require(eps >= 0.0, ErrorCode::InvalidArgument, "eps must be nonnegative");
    const double h = u0.grid().h();
    const double l2 = l2_norm(u0);
    const double grad = std::sqrt(gradient_norm_sq(u0.values(), h));
    double lap = 0.0;
    if (eps > 0.0) lap = std::sqrt(interior_lp_integral(laplacian(u0.values(), h), h, 2.0));
    return l2 + grad + eps * lap;
}

} // namespace ellab
