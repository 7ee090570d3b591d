#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ellab/elliptic.hpp"
#include "ellab/equilibria.hpp"
#include "ellab/error.hpp"
#include "ellab/forcing.hpp"
#include "ellab/parabolic.hpp"

namespace ellab {

struct PeriodicOptions {
    double tol = 1e-6;       // required ||P(u*) - u*||_{L2}
    double newton_tol = 1e-9;  // the iteration aims lower than the contract
    int max_iters = 20;
};

struct PeriodicTrack {
    Field u_star;
    Trajectory orbit;  // one period, every axial node
    double period = 0.0;
    double residual = 0.0;
    int iterations = 0;
    double max_deviation = 0.0;  // max_t ||u*(t) - z||
};

namespace detail {

/// Period map and its derivative: P(u) = U(tau + T, tau) u together with the
/// matrix dP/du in component-major order.
struct PeriodMapEval {
    Field value;
    Trajectory orbit;
    Eigen::MatrixXd jacobian;
};

inline PeriodMapEval eval_period_map(const Field& u, double period, const ProcessContext& ctx, bool want_jac) {
    PeriodMapEval out;
    const int dim = u.n() * u.k();
    const double dt = ctx.axial_step(period);
    const int mr = static_cast<int>(std::lround(period / dt));
    if (ctx.eps == 0.0) {
        StepOptions so;
        so.dt = dt;
        so.newton = ctx.newton;
        Trajectory base = semigroup_evolve(u, mr * dt, so, ctx.mats, ctx.nl, ctx.forcing());
        out.value = base.back();
        out.orbit = base;
        if (want_jac) {
            out.jacobian.resize(dim, dim);
            for (int c = 0; c < dim; ++c) {
                Field e = Field::zero(u.grid(), u.k());
                e.flat()(c) = 1.0;
                out.jacobian.col(c) = variational_evolve(base, e, ctx.mats, ctx.nl).back().flat();
            }
        }
        return out;
    }
    const int mm = std::max(2, static_cast<int>(std::ceil(ctx.margin / dt - 1e-9)));
    const CylinderGrid cg(0.0, (mr + mm) * dt, mr + mm, ctx.eps);
    SpaceTimeSolver solver(ctx.grid, cg, ctx.mats, ctx.nl, ctx.g.get(), ctx.far);
    CylinderField sol;
    try {
        sol = solver.newton(u, solver.constant_extension(u), ctx.newton);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NewtonDiverged) throw;
        ProcessContext warm = ctx;
        warm.warm_start = true;
        sol = solve_process(u, 0.0, mr * dt, period, warm).field;
    }
    out.value = sol.slice(mr);
    for (int i = 0; i <= mr; ++i) out.orbit.push(cg.time(i), sol.slice(i));
    if (want_jac) {
        solver.factor_at(sol);
        out.jacobian.resize(dim, dim);
        for (int c = 0; c < dim; ++c) {
            Field e = Field::zero(u.grid(), u.k());
            e.flat()(c) = 1.0;
            const CylinderField v = solver.linear_response(e);
            out.jacobian.col(c) = Eigen::Map<const Eigen::VectorXd>(v.at(mr).data(), dim);
        }
    }
    return out;
}

} // namespace detail

/// Fixed point of the period map near the equilibrium of `rec` by Newton's
/// method on P(u) - u; the derivative of P comes from the equation of
/// variations with the cached space-time factorization.
inline PeriodicTrack track_periodic_solution(const EquilibriumRecord& rec, const ForcingPtr& g, double eps,
                                             const ProcessContext& base_ctx, const PeriodicOptions& opts = {}) {
    require(rec.hyperbolic, ErrorCode::NotHyperbolic, "periodic tracking needs a hyperbolic equilibrium");
    require(g != nullptr, ErrorCode::InvalidArgument, "periodic tracking needs a forcing");
    const double period = forcing_period(*g);
    require(period > 0.0, ErrorCode::InvalidArgument, "forcing is not time-periodic");
    ProcessContext ctx = base_ctx;
    ctx.eps = eps;
    ctx.g = g;
    const int dim = rec.z.n() * rec.z.k();
    Field u = rec.z;
    PeriodicTrack out;
    out.period = period;
    double res = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= opts.max_iters; ++it) {
        detail::PeriodMapEval pm = detail::eval_period_map(u, period, ctx, true);
        Field r = pm.value - u;
        res = l2_norm(r);
        if (res <= opts.newton_tol || it == opts.max_iters) {
            out.u_star = u;
            out.orbit = std::move(pm.orbit);
            out.iterations = it;
            break;
        }
        const Eigen::MatrixXd a = pm.jacobian - Eigen::MatrixXd::Identity(dim, dim);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
        const Eigen::VectorXd delta = lu.solve(-r.flat());
        require(delta.allFinite(), ErrorCode::FixedPointDiverged, "period-map Newton step is not finite");
        // halving on the fixed-point residual
        double lam = 1.0;
        bool accepted = false;
        for (int hv = 0; hv < 20; ++hv, lam *= 0.5) {
            Field trial = u;
            trial.flat() += lam * delta;
            const double rt = l2_norm(detail::eval_period_map(trial, period, ctx, false).value - trial);
            if (rt < res) {
                u = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // stalled at the inner solver's accuracy: fine if the contract holds
            if (res > opts.tol) fail(ErrorCode::FixedPointDiverged, "period-map Newton stalled at residual " + std::to_string(res));
            out.u_star = u;
            out.orbit = std::move(pm.orbit);
            out.iterations = it;
            break;
        }
    }
    out.residual = res;
    if (res > opts.tol) fail(ErrorCode::FixedPointDiverged, "period-map residual " + std::to_string(res) + " above tolerance");
    for (const auto& s : out.orbit.states) out.max_deviation = std::max(out.max_deviation, l2_dist(s, rec.z));
    return out;
}

struct QuasiperiodicTrack {
    double max_deviation = 0.0;   // over the run after the first time unit
    double recurrence = 0.0;      // min ||u(t) - u(t_mid)|| over the second half, t >= t_mid + 1
    bool stayed_near = false;     // max_deviation <= radius
};

/// Long-run bounded tracking near z for forcing without a finite period.
inline QuasiperiodicTrack track_quasiperiodic(const EquilibriumRecord& rec, const ForcingPtr& g, double eps,
                                              const ProcessContext& base_ctx, double t_run, double radius,
                                              double stride = 0.25) {
    ProcessContext ctx = base_ctx;
    ctx.eps = eps;
    ctx.g = g;
    const Trajectory t = process_trajectory(rec.z, 0.0, t_run, stride, ctx);
    QuasiperiodicTrack out;
    const size_t mid = t.size() / 2;
    out.recurrence = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < t.size(); ++i) {
        if (t.times[i] >= 1.0) out.max_deviation = std::max(out.max_deviation, l2_dist(t.states[i], rec.z));
        if (i > mid && t.times[i] >= t.times[mid] + 1.0)
            out.recurrence = std::min(out.recurrence, l2_dist(t.states[i], t.states[mid]));
    }
    out.stayed_near = out.max_deviation <= radius;
    return out;
}

} // namespace ellab
