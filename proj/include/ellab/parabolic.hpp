#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "ellab/error.hpp"
#include "ellab/field.hpp"
#include "ellab/forcing.hpp"
#include "ellab/linalg.hpp"
#include "ellab/model.hpp"
#include "ellab/newton.hpp"
#include "ellab/operators.hpp"

namespace ellab {

/// Backward-Euler stepping of the limit flow gamma u_t = a Delta u - f(u) - g(t).
struct StepOptions {
    double dt = 1e-3;
    NewtonOptions newton{};
};

namespace detail {

// Node-major flattening (index j*k + c) keeps the spatial Jacobian banded.
inline Eigen::VectorXd to_node_major(const Eigen::MatrixXd& u) {
    Eigen::VectorXd out(u.size());
    const Eigen::Index k = u.cols();
    for (Eigen::Index j = 0; j < u.rows(); ++j)
        for (Eigen::Index c = 0; c < k; ++c) out(j * k + c) = u(j, c);
    return out;
}

inline Eigen::MatrixXd from_node_major(const Eigen::VectorXd& v, Eigen::Index n, Eigen::Index k) {
    Eigen::MatrixXd out(n, k);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index c = 0; c < k; ++c) out(j, c) = v(j * k + c);
    return out;
}

/// Banded factorization of  diag_coef * gamma (x) I - a (x) Delta_h + f'(v)
/// (diag_coef = 0 gives the stationary linearization with the opposite sign).
inline BandedLU spatial_jacobian(const Eigen::MatrixXd& v, double h, double diag_coef, const CouplingMatrices& mats,
                                 const Nonlinearity& nl) {
    const int n = static_cast<int>(v.rows());
    const int k = mats.k;
    const int bw = 2 * k - 1;
    BandedLU lu(n * k, bw, bw);
    const double s = 1.0 / (h * h);
    Eigen::MatrixXd jac;
    for (int j = 0; j < n; ++j) {
        nl.jacobian_at(v, j, jac);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) {
                lu.add(j * k + r, j * k + c, diag_coef * mats.gamma(r, c) + 2.0 * s * mats.a(r, c) + jac(r, c));
                if (j > 0) lu.add(j * k + r, (j - 1) * k + c, -s * mats.a(r, c));
                if (j + 1 < n) lu.add(j * k + r, (j + 1) * k + c, -s * mats.a(r, c));
            }
        }
    }
    lu.factor();
    return lu;
}

} // namespace detail

/// a Delta_x u - f(u) - g: the limit vector field times gamma.
inline Field limit_vector_field(const Field& u, const CouplingMatrices& mats, const Nonlinearity& nl, const Field& g) {
    const Eigen::MatrixXd out =
        laplacian(u.values(), u.grid().h()) * mats.a.transpose() - nl.apply(u.values()) - g.values();
    return Field(u.grid(), out);
}

/// One backward-Euler step: gamma (u' - u)/dt = a Delta u' - f(u') - g(t + dt).
inline Field implicit_step(const Field& u, double t, const StepOptions& opts, const CouplingMatrices& mats,
                           const Nonlinearity& nl, const Forcing& g) {
    require(opts.dt > 0.0, ErrorCode::InvalidArgument, "dt must be positive");
    require(u.values().allFinite(), ErrorCode::NonFiniteValue, "implicit_step input is not finite");
    require(u.k() == mats.k && nl.k == mats.k, ErrorCode::ShapeMismatch, "component count mismatch");
    const Eigen::Index n = u.n();
    const Eigen::Index k = u.k();
    const double h = u.grid().h();
    const double inv_dt = 1.0 / opts.dt;
    Eigen::MatrixXd gval;
    eval_forcing_into(g, t + opts.dt, gval);
    const Eigen::MatrixXd base = u.values();
    const Eigen::MatrixXd at = mats.a.transpose();
    const Eigen::MatrixXd gt = mats.gamma.transpose();

    auto residual = [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd v = detail::from_node_major(x, n, k);
        const Eigen::MatrixXd r = inv_dt * (v - base) * gt - laplacian(v, h) * at + nl.apply(v) + gval;
        return detail::to_node_major(r);
    };
    auto step = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
        const Eigen::MatrixXd v = detail::from_node_major(x, n, k);
        BandedLU lu = detail::spatial_jacobian(v, h, inv_dt, mats, nl);
        Eigen::VectorXd d = -r;
        lu.solve_in_place(d);
        return d;
    };
    Eigen::VectorXd x = detail::to_node_major(base);
    newton_solve(x, residual, step, opts.newton);
    return Field(u.grid(), detail::from_node_major(x, n, k));
}

/// Composition of implicit steps from t0 to t0 + t_end. The step is shrunk so
/// that t_end is hit exactly; every `record_stride`-th state (and the last)
/// is kept.
inline Trajectory semigroup_evolve(const Field& u0, double t_end, const StepOptions& opts,
                                   const CouplingMatrices& mats, const Nonlinearity& nl, const Forcing& g,
                                   double t0 = 0.0, int record_stride = 1) {
    require(t_end >= 0.0, ErrorCode::InvalidArgument, "t_end must be nonnegative");
    require(record_stride >= 1, ErrorCode::InvalidArgument, "record_stride must be positive");
    Trajectory traj;
    traj.push(t0, u0);
    if (t_end == 0.0) return traj;
    const long steps = std::max(1L, static_cast<long>(std::ceil(t_end / opts.dt - 1e-9)));
    StepOptions local = opts;
    local.dt = t_end / static_cast<double>(steps);
    Field u = u0;
    for (long i = 1; i <= steps; ++i) {
        const double t = t0 + static_cast<double>(i - 1) * local.dt;
        u = implicit_step(u, t, local, mats, nl, g);
        if (i % record_stride == 0 || i == steps) traj.push(t0 + static_cast<double>(i) * local.dt, u);
    }
    return traj;
}

/// Linearized flow gamma w_t = a Delta w - f'(u(t)) w along a base trajectory
/// recorded at every step, with the same backward-Euler stepping.
inline Trajectory variational_evolve(const Trajectory& base, const Field& xi, const CouplingMatrices& mats,
                                     const Nonlinearity& nl) {
    require(!base.empty(), ErrorCode::InvalidArgument, "empty base trajectory");
    base.states.front().check_shape(xi);
    Trajectory out;
    out.push(base.times.front(), xi);
    const Eigen::Index n = xi.n();
    const Eigen::Index k = xi.k();
    const double h = xi.grid().h();
    Eigen::MatrixXd w = xi.values();
    for (size_t i = 1; i < base.size(); ++i) {
        const double dt = base.times[i] - base.times[i - 1];
        require(dt > 0.0, ErrorCode::InvalidArgument, "base trajectory times must increase");
        BandedLU lu = detail::spatial_jacobian(base.states[i].values(), h, 1.0 / dt, mats, nl);
        Eigen::VectorXd rhs = detail::to_node_major(w * mats.gamma.transpose() / dt);
        lu.solve_in_place(rhs);
        w = detail::from_node_major(rhs, n, k);
        out.push(base.times[i], Field(xi.grid(), w));
    }
    return out;
}

/// L(u) = int a grad u . grad u + 2 F(u) + 2 gbar . u dx. Gradient on cells,
/// potential and forcing terms by the trapezoid rule with Dirichlet ends.
inline double lyapunov_value(const Field& u, const CouplingMatrices& mats, const Nonlinearity& nl, const Field& gbar) {
    require(nl.potential_F.has_value(), ErrorCode::MissingPotential, "Lyapunov functional needs a potential");
    require(mats.a_symmetric(), ErrorCode::AsymmetricA, "Lyapunov functional needs a = a^T");
    u.check_shape(gbar);
    const double h = u.grid().h();
    const Eigen::Index n = u.n();
    const Eigen::Index k = u.k();
    double grad = 0.0;
    for (Eigen::Index j = 0; j <= n; ++j) {
        Eigen::VectorXd d(k);
        for (Eigen::Index c = 0; c < k; ++c) {
            const double right = j < n ? u(static_cast<int>(j), static_cast<int>(c)) : 0.0;
            const double left = j > 0 ? u(static_cast<int>(j - 1), static_cast<int>(c)) : 0.0;
            d(c) = (right - left) / h;
        }
        grad += h * d.dot(mats.a * d);
    }
    const auto& F = *nl.potential_F;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(k);
    double pot = h * F(zero);  // two half-weight end nodes
    for (Eigen::Index j = 0; j < n; ++j) pot += h * F(u.values().row(j).transpose());
    const double forcing = l2_inner(u, gbar);
    return grad + 2.0 * pot + 2.0 * forcing;
}

} // namespace ellab
