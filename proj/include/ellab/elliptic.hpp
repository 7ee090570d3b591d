#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ellab/coupling.hpp"
#include "ellab/error.hpp"
#include "ellab/field.hpp"
#include "ellab/forcing.hpp"
#include "ellab/grid.hpp"
#include "ellab/linalg.hpp"
#include "ellab/newton.hpp"
#include "ellab/nonlinearity.hpp"
#include "ellab/operators.hpp"
#include "ellab/parabolic.hpp"

namespace ellab {

/// Condition imposed on the last axial slice of the truncated cylinder.
struct FarBoundary {
    enum class Kind { ZeroTimeDerivative, Clamp };
    Kind kind = Kind::ZeroTimeDerivative;
    std::optional<Field> profile;

    static FarBoundary zero_time_derivative() { return {}; }
    static FarBoundary clamp(Field profile) {
        FarBoundary fb;
        fb.kind = Kind::Clamp;
        fb.profile = std::move(profile);
        return fb;
    }
};

/// Space-time discretization of
///   a(eps^2 u_tt + Delta u) - gamma u_t - f(u) - g = 0
/// on the nodes 1..M of a cylinder grid; slice 0 carries the data u_tau.
/// Residual rows 1..M-1 are the central-difference equation, row M is the
/// far condition. Unknowns are stored slice by slice (n x k blocks).
class SpaceTimeSolver {
public:
    SpaceTimeSolver(SpatialGrid sgrid, CylinderGrid cgrid, CouplingMatrices mats, Nonlinearity nl,
                    const Forcing* g, FarBoundary far)
        : sgrid_(sgrid), cgrid_(cgrid), mats_(std::move(mats)), nl_(std::move(nl)), far_(std::move(far)) {
        require(cgrid_.eps() > 0.0, ErrorCode::InvalidArgument, "space-time assembly needs eps > 0");
        require(cgrid_.m_steps() >= 2, ErrorCode::InvalidArgument, "space-time assembly needs m_steps >= 2");
        require(nl_.k == mats_.k, ErrorCode::ShapeMismatch, "nonlinearity and matrices disagree on k");
        if (far_.kind == FarBoundary::Kind::Clamp) {
            require(far_.profile.has_value(), ErrorCode::InvalidArgument, "clamp boundary needs a profile");
            require(far_.profile->grid() == sgrid_ && far_.profile->k() == mats_.k, ErrorCode::ShapeMismatch,
                    "clamp profile shape mismatch");
        }
        const int m = cgrid_.m_steps();
        const int n = sgrid_.n_interior();
        const double dt = cgrid_.dt();
        const double e2 = cgrid_.eps() * cgrid_.eps();
        c2_ = e2 / (dt * dt);
        lower_c_ = c2_ * mats_.a + mats_.gamma / (2.0 * dt);
        upper_c_ = c2_ * mats_.a - mats_.gamma / (2.0 * dt);
        far_scale_ = c2_ + 1.0 / (2.0 * dt);
        gvals_.assign(static_cast<size_t>(m), Eigen::MatrixXd::Zero(n, mats_.k));
        if (g != nullptr) {
            require(g->grid() == sgrid_ && g->k() == mats_.k, ErrorCode::ShapeMismatch, "forcing shape mismatch");
            for (int i = 1; i < m; ++i) eval_forcing_into(*g, cgrid_.time(i), gvals_[static_cast<size_t>(i)]);
        }
    }

    [[nodiscard]] const CylinderGrid& cgrid() const noexcept { return cgrid_; }
    [[nodiscard]] const SpatialGrid& sgrid() const noexcept { return sgrid_; }
    [[nodiscard]] int unknowns() const noexcept { return cgrid_.m_steps() * sgrid_.n_interior() * mats_.k; }

    /// Full residual (rows 1..M) of a candidate field, as a flat vector.
    [[nodiscard]] Eigen::VectorXd residual(const CylinderField& u) const {
        const int m = cgrid_.m_steps();
        const int n = sgrid_.n_interior();
        const int k = mats_.k;
        const double dt = cgrid_.dt();
        const double h = sgrid_.h();
        const Eigen::MatrixXd at = mats_.a.transpose();
        const Eigen::MatrixXd gt = mats_.gamma.transpose();
        Eigen::VectorXd out(unknowns());
        const Eigen::Index blk = static_cast<Eigen::Index>(n) * k;
        for (int i = 1; i < m; ++i) {
            const Eigen::MatrixXd r = (c2_ * (u.at(i + 1) - 2.0 * u.at(i) + u.at(i - 1)) + laplacian(u.at(i), h)) * at -
                                      (u.at(i + 1) - u.at(i - 1)) * gt / (2.0 * dt) - nl_.apply(u.at(i)) -
                                      gvals_[static_cast<size_t>(i)];
            out.segment((i - 1) * blk, blk) = Eigen::Map<const Eigen::VectorXd>(r.data(), blk);
        }
        Eigen::MatrixXd rf;
        if (far_.kind == FarBoundary::Kind::ZeroTimeDerivative) {
            rf = far_scale_ * (u.at(m) - u.at(m - 1));
        } else {
            rf = far_scale_ * (u.at(m) - far_.profile->values());
        }
        out.segment((m - 1) * blk, blk) = Eigen::Map<const Eigen::VectorXd>(rf.data(), blk);
        return out;
    }

    /// Assembles and factors the Jacobian at u.
    void factor_at(const CylinderField& u) {
        const int m = cgrid_.m_steps();
        const int n = sgrid_.n_interior();
        const int k = mats_.k;
        const int nk = n * k;
        const double h = sgrid_.h();
        const double s = 1.0 / (h * h);
        std::vector<Eigen::MatrixXd> diag(static_cast<size_t>(m));
        std::vector<Eigen::MatrixXd> lower(static_cast<size_t>(m), lower_c_);
        std::vector<Eigen::MatrixXd> upper(static_cast<size_t>(m), upper_c_);
        Eigen::MatrixXd jac;
        for (int i = 1; i < m; ++i) {
            Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nk, nk);
            for (int r = 0; r < k; ++r) {
                for (int c = 0; c < k; ++c) {
                    const double arc = mats_.a(r, c);
                    if (arc == 0.0) continue;
                    for (int j = 0; j < n; ++j) {
                        d(r * n + j, c * n + j) += arc * (-2.0 * s - 2.0 * c2_);
                        if (j > 0) d(r * n + j, c * n + j - 1) += arc * s;
                        if (j + 1 < n) d(r * n + j, c * n + j + 1) += arc * s;
                    }
                }
            }
            for (int j = 0; j < n; ++j) {
                nl_.jacobian_at(u.at(i), j, jac);
                for (int r = 0; r < k; ++r)
                    for (int c = 0; c < k; ++c) d(r * n + j, c * n + j) -= jac(r, c);
            }
            diag[static_cast<size_t>(i - 1)] = std::move(d);
        }
        diag[static_cast<size_t>(m - 1)] = far_scale_ * Eigen::MatrixXd::Identity(nk, nk);
        lower[static_cast<size_t>(m - 1)] = far_.kind == FarBoundary::Kind::ZeroTimeDerivative
                                                ? Eigen::MatrixXd(-far_scale_ * Eigen::MatrixXd::Identity(k, k))
                                                : Eigen::MatrixXd(Eigen::MatrixXd::Zero(k, k));
        fact_.factor(std::move(diag), std::move(lower), std::move(upper), n, k);
    }

    [[nodiscard]] bool factored() const noexcept { return fact_.factored(); }

    /// Solves J d = rhs with the current factorization; rhs and d are flat.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        require(fact_.factored(), ErrorCode::InvalidArgument, "space-time Jacobian is not factored");
        std::vector<Eigen::MatrixXd> blocks = unflatten(rhs);
        fact_.solve(blocks);
        return flatten(blocks);
    }

    /// Newton iteration from `guess` (slice 0 is overwritten by u_tau).
    CylinderField newton(const Field& u_tau, CylinderField guess, const NewtonOptions& opts,
                         NewtonTrace* trace_out = nullptr) {
        require(u_tau.grid() == sgrid_ && u_tau.k() == mats_.k, ErrorCode::ShapeMismatch, "u_tau shape mismatch");
        guess.at(0) = u_tau.values();
        Eigen::VectorXd x = flatten_unknowns(guess);
        CylinderField work = guess;
        auto residual_fn = [&](const Eigen::VectorXd& y) {
            load_unknowns(y, work);
            return residual(work);
        };
        auto step_fn = [&](const Eigen::VectorXd& y, const Eigen::VectorXd& r) {
            load_unknowns(y, work);
            factor_at(work);
            return Eigen::VectorXd(solve(-r));
        };
        NewtonTrace trace = newton_solve(x, residual_fn, step_fn, opts);
        load_unknowns(x, work);
        require(work.all_finite(), ErrorCode::NonFiniteValue, "space-time solution is not finite");
        if (trace_out) *trace_out = std::move(trace);
        return work;
    }

    /// Linear response v with v_0 = xi of the factored Jacobian: J v = 0.
    [[nodiscard]] CylinderField linear_response(const Field& xi) const {
        require(xi.grid() == sgrid_ && xi.k() == mats_.k, ErrorCode::ShapeMismatch, "xi shape mismatch");
        const int n = sgrid_.n_interior();
        const int k = mats_.k;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns());
        const Eigen::MatrixXd r1 = -xi.values() * lower_c_.transpose();
        rhs.head(static_cast<Eigen::Index>(n) * k) = Eigen::Map<const Eigen::VectorXd>(r1.data(), r1.size());
        const Eigen::VectorXd v = solve(rhs);
        CylinderField out(sgrid_, cgrid_, k);
        out.at(0) = xi.values();
        load_unknowns(v, out);
        return out;
    }

    /// Constant-in-time extension of u_tau (the default Newton start).
    [[nodiscard]] CylinderField constant_extension(const Field& u_tau) const {
        CylinderField out(sgrid_, cgrid_, mats_.k);
        for (int i = 0; i <= cgrid_.m_steps(); ++i) out.at(i) = u_tau.values();
        return out;
    }

private:
    [[nodiscard]] std::vector<Eigen::MatrixXd> unflatten(const Eigen::VectorXd& x) const {
        const int m = cgrid_.m_steps();
        const int n = sgrid_.n_interior();
        const int k = mats_.k;
        const Eigen::Index blk = static_cast<Eigen::Index>(n) * k;
        std::vector<Eigen::MatrixXd> out(static_cast<size_t>(m));
        for (int q = 0; q < m; ++q) {
            out[static_cast<size_t>(q)] = Eigen::Map<const Eigen::MatrixXd>(x.data() + q * blk, n, k);
        }
        return out;
    }
    [[nodiscard]] Eigen::VectorXd flatten(const std::vector<Eigen::MatrixXd>& blocks) const {
        const Eigen::Index blk = static_cast<Eigen::Index>(sgrid_.n_interior()) * mats_.k;
        Eigen::VectorXd out(unknowns());
        for (size_t q = 0; q < blocks.size(); ++q) {
            out.segment(static_cast<Eigen::Index>(q) * blk, blk) =
                Eigen::Map<const Eigen::VectorXd>(blocks[q].data(), blk);
        }
        return out;
    }
    [[nodiscard]] Eigen::VectorXd flatten_unknowns(const CylinderField& u) const {
        const int m = cgrid_.m_steps();
        const Eigen::Index blk = static_cast<Eigen::Index>(sgrid_.n_interior()) * mats_.k;
        Eigen::VectorXd out(unknowns());
        for (int i = 1; i <= m; ++i) {
            out.segment((i - 1) * blk, blk) = Eigen::Map<const Eigen::VectorXd>(u.at(i).data(), blk);
        }
        return out;
    }
    void load_unknowns(const Eigen::VectorXd& x, CylinderField& u) const {
        const int m = cgrid_.m_steps();
        const int n = sgrid_.n_interior();
        const int k = mats_.k;
        const Eigen::Index blk = static_cast<Eigen::Index>(n) * k;
        for (int i = 1; i <= m; ++i) {
            u.at(i) = Eigen::Map<const Eigen::MatrixXd>(x.data() + (i - 1) * blk, n, k);
        }
    }

    SpatialGrid sgrid_;
    CylinderGrid cgrid_;
    CouplingMatrices mats_;
    Nonlinearity nl_;
    FarBoundary far_;
    double c2_ = 0.0;
    double far_scale_ = 1.0;
    Eigen::MatrixXd lower_c_;
    Eigen::MatrixXd upper_c_;
    std::vector<Eigen::MatrixXd> gvals_;
    SpaceTimeFactorization fact_;
};

namespace detail {

inline CylinderField parabolic_march(const SpatialGrid& sgrid, const CylinderGrid& cgrid, const CouplingMatrices& mats,
                                     const Nonlinearity& nl, const Forcing& g, const Field& u_tau,
                                     const NewtonOptions& opts) {
    StepOptions so;
    so.dt = cgrid.dt();
    so.newton = opts;
    CylinderField out(sgrid, cgrid, mats.k);
    out.at(0) = u_tau.values();
    Field u = u_tau;
    for (int i = 1; i <= cgrid.m_steps(); ++i) {
        u = implicit_step(u, cgrid.time(i - 1), so, mats, nl, g);
        out.at(i) = u.values();
    }
    return out;
}

} // namespace detail

/// Solves the truncated boundary value problem on cgrid. For eps = 0 the
/// problem is an initial-value problem and is delegated to backward-Euler
/// stepping on the same axial nodes (the far condition is then void).
inline CylinderField solve_truncated_bvp(const SpatialGrid& sgrid, const CylinderGrid& cgrid,
                                         const CouplingMatrices& mats, const Nonlinearity& nl, const Forcing& g,
                                         const Field& u_tau, const FarBoundary& far, const NewtonOptions& opts,
                                         const CylinderField* guess = nullptr, NewtonTrace* trace = nullptr) {
    require(u_tau.grid() == sgrid, ErrorCode::ShapeMismatch, "u_tau does not live on sgrid");
    require(u_tau.values().allFinite(), ErrorCode::NonFiniteValue, "u_tau is not finite");
    require(cgrid.eps() <= kEpsMax, ErrorCode::InvalidArgument, "eps exceeds eps_max");
    if (cgrid.eps() == 0.0) return detail::parabolic_march(sgrid, cgrid, mats, nl, g, u_tau, opts);
    SpaceTimeSolver solver(sgrid, cgrid, mats, nl, &g, far);
    CylinderField start = guess ? *guess : solver.constant_extension(u_tau);
    start.check_shape(solver.constant_extension(u_tau));
    return solver.newton(u_tau, std::move(start), opts, trace);
}

/// Everything needed to evaluate the solving process U^eps_g(t, tau).
struct ProcessContext {
    CouplingMatrices mats;
    Nonlinearity nl;
    SpatialGrid grid;
    ForcingPtr g;
    double eps = 0.0;
    /// Discarded axial length beyond the last reported slice.
    double margin = 2.0;
    /// Axial step for eps > 0 (0 picks default_axial_step).
    double dt = 0.0;
    /// Step of the eps = 0 march.
    double parabolic_dt = 1e-3;
    NewtonOptions newton{};
    FarBoundary far{};
    /// Start Newton from a backward-Euler march instead of the constant extension.
    bool warm_start = false;

    [[nodiscard]] const Forcing& forcing() const {
        require(g != nullptr, ErrorCode::InvalidArgument, "process context has no forcing");
        return *g;
    }
    /// Axial step, shrunk so that `stride` is a whole number of steps.
    [[nodiscard]] double axial_step(double stride) const {
        const double base = eps == 0.0 ? parabolic_dt : (dt > 0.0 ? dt : default_axial_step(eps));
        return stride > 0.0 ? aligned_step(base, stride) : base;
    }
};

struct ProcessSolve {
    CylinderField field;
    int report_index = 0;  // slice of the last reported time
    NewtonTrace trace;
};

/// Solves on [tau, tau + t_len + margin] with a step dividing `stride`.
inline ProcessSolve solve_process(const Field& u_tau, double tau, double t_len, double stride,
                                  const ProcessContext& ctx) {
    require(t_len > 0.0, ErrorCode::InvalidArgument, "process horizon must be positive");
    const double dt = ctx.axial_step(stride > 0.0 ? stride : t_len);
    const int m_report = static_cast<int>(std::lround(t_len / dt));
    ProcessSolve out;
    out.report_index = m_report;
    if (ctx.eps == 0.0) {
        CylinderGrid cg(tau, m_report * dt, m_report, 0.0);
        out.field = detail::parabolic_march(ctx.grid, cg, ctx.mats, ctx.nl, ctx.forcing(), u_tau, ctx.newton);
        return out;
    }
    const int m_margin = std::max(2, static_cast<int>(std::ceil(ctx.margin / dt - 1e-9)));
    const int m = m_report + m_margin;
    CylinderGrid cg(tau, m * dt, m, ctx.eps);
    SpaceTimeSolver solver(ctx.grid, cg, ctx.mats, ctx.nl, ctx.g.get(), ctx.far);
    auto warm = [&] {
        CylinderGrid pg(tau, m * dt, m, 0.0);
        CylinderField w = detail::parabolic_march(ctx.grid, pg, ctx.mats, ctx.nl, ctx.forcing(), u_tau, ctx.newton);
        CylinderField guess(ctx.grid, cg, ctx.mats.k);
        for (int i = 0; i <= m; ++i) guess.at(i) = w.at(i);
        return guess;
    };
    if (ctx.warm_start) {
        out.field = solver.newton(u_tau, warm(), ctx.newton, &out.trace);
        return out;
    }
    try {
        out.field = solver.newton(u_tau, solver.constant_extension(u_tau), ctx.newton, &out.trace);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NewtonDiverged) throw;
        // Long horizons can defeat the constant start; retry from the limit flow.
        out.field = solver.newton(u_tau, warm(), ctx.newton, &out.trace);
    }
    return out;
}

/// U^eps_g(t, tau) u_tau: solve on [tau, t + margin] and read the slice at t.
inline Field process_map(const Field& u_tau, double tau, double t, const ProcessContext& ctx) {
    require(t >= tau, ErrorCode::InvalidArgument, "process_map needs t >= tau");
    if (t == tau) return u_tau;
    const ProcessSolve s = solve_process(u_tau, tau, t - tau, 0.0, ctx);
    return s.field.slice(s.report_index);
}

/// Trajectory t -> U(t, tau) u_tau sampled every `stride` on [tau, tau + t_len],
/// from a single solve.
inline Trajectory process_trajectory(const Field& u_tau, double tau, double t_len, double stride,
                                     const ProcessContext& ctx) {
    require(stride > 0.0 && stride <= t_len + 1e-12, ErrorCode::InvalidArgument, "stride must lie in (0, t_len]");
    const double dt = ctx.axial_step(stride);
    const int per = static_cast<int>(std::lround(stride / dt));
    const ProcessSolve s = solve_process(u_tau, tau, t_len, stride, ctx);
    Trajectory traj;
    for (int i = 0; i <= s.report_index; i += per) traj.push(s.field.cgrid().time(i), s.field.slice(i));
    return traj;
}

/// Solution of the equation of variations along a converged base solution,
/// v_0 = xi, same truncation and far condition (homogeneous form).
inline CylinderField variational_process(const CylinderField& base, const Field& xi, const CouplingMatrices& mats,
                                         const Nonlinearity& nl, const FarBoundary& far = {}) {
    require(xi.grid() == base.sgrid() && xi.k() == base.k(), ErrorCode::ShapeMismatch, "xi shape mismatch");
    if (base.cgrid().eps() == 0.0) {
        Trajectory bt;
        for (int i = 0; i <= base.m_steps(); ++i) bt.push(base.cgrid().time(i), base.slice(i));
        const Trajectory w = variational_evolve(bt, xi, mats, nl);
        CylinderField out(base.sgrid(), base.cgrid(), base.k());
        for (int i = 0; i <= base.m_steps(); ++i) out.at(i) = w.states[static_cast<size_t>(i)].values();
        return out;
    }
    FarBoundary homogeneous = far;
    if (homogeneous.kind == FarBoundary::Kind::Clamp) homogeneous.profile = Field::zero(base.sgrid(), base.k());
    SpaceTimeSolver solver(base.sgrid(), base.cgrid(), mats, nl, nullptr, homogeneous);
    solver.factor_at(base);
    return solver.linear_response(xi);
}

/// u_l = U(l, m) u_m by unit-time applications of the process map.
inline Field discrete_cascade(int l, int m, const Field& u_m, const ProcessContext& ctx) {
    require(l >= m, ErrorCode::InvalidArgument, "discrete_cascade needs l >= m");
    Field u = u_m;
    for (int s = m; s < l; ++s) u = process_map(u, s, s + 1, ctx);
    return u;
}

struct UniquenessRow {
    double eps = 0.0;
    int guesses = 0;
    int converged = 0;
    double spread = 0.0;  // max L2 gap between converged solutions on [tau, tau + t_len]
    bool agree = false;
};

struct UniquenessRecord {
    std::vector<UniquenessRow> rows;
    /// Largest eps at which every guess converged to the same solution; an
    /// observation about this discretization, not a proven threshold.
    std::optional<double> largest_agreeing_eps;
};

/// Starting guesses for Newton: the constant extension, an exponential decay
/// toward zero, and constant extensions plus seeded random sine modes.
inline std::vector<CylinderField> uniqueness_guesses(const Field& u_tau, const CylinderGrid& cg, int count,
                                                     std::uint64_t seed) {
    std::vector<CylinderField> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    for (int j = 0; j < count; ++j) {
        CylinderField g(u_tau.grid(), cg, u_tau.k());
        Field bump = Field::zero(u_tau.grid(), u_tau.k());
        if (j >= 2) {
            for (int mode = 1; mode <= 4; ++mode)
                for (int c = 0; c < u_tau.k(); ++c) bump += Field::sine_mode(u_tau.grid(), mode, amp(rng), u_tau.k(), c);
        }
        for (int i = 0; i <= cg.m_steps(); ++i) {
            const double s = cg.time(i) - cg.tau();
            const double w = j == 1 ? std::exp(-s) : 1.0;
            g.at(i) = w * u_tau.values() + (s / (1.0 + s)) * bump.values();
        }
        out.push_back(std::move(g));
    }
    return out;
}

/// Solves the truncated problem from several guesses per eps > 0 and records
/// whether the converged solutions coincide on the reported window.
inline UniquenessRecord uniqueness_probe(const std::vector<double>& eps_list, const Field& u_tau, double t_len,
                                         const ProcessContext& ctx, int n_guesses = 4, double agree_tol = 1e-6,
                                         std::uint64_t seed = 0) {
    require(t_len > 0.0 && n_guesses >= 2, ErrorCode::InvalidArgument, "uniqueness probe needs t_len > 0, 2+ guesses");
    UniquenessRecord rec;
    for (double eps : eps_list) {
        if (eps <= 0.0) continue;
        ProcessContext c = ctx;
        c.eps = eps;
        const double dt = c.axial_step(t_len);
        const int m_report = static_cast<int>(std::lround(t_len / dt));
        const int m = m_report + static_cast<int>(std::ceil(c.margin / dt));
        const CylinderGrid cg(0.0, m * dt, m, eps);
        SpaceTimeSolver solver(ctx.grid, cg, c.mats, c.nl, &c.forcing(), c.far);
        UniquenessRow row;
        row.eps = eps;
        row.guesses = n_guesses;
        std::vector<CylinderField> sols;
        for (auto& guess : uniqueness_guesses(u_tau, cg, n_guesses, seed)) {
            try {
                sols.push_back(solver.newton(u_tau, std::move(guess), c.newton));
            } catch (const Error&) {
            }
        }
        row.converged = static_cast<int>(sols.size());
        for (size_t a = 1; a < sols.size(); ++a)
            for (int i = 0; i <= m_report; ++i)
                row.spread = std::max(row.spread, l2_dist(sols[0].slice(i), sols[a].slice(i)));
        row.agree = row.converged == n_guesses && row.spread <= agree_tol;
        if (row.agree && (!rec.largest_agreeing_eps || eps > *rec.largest_agreeing_eps)) rec.largest_agreeing_eps = eps;
        rec.rows.push_back(row);
    }
    return rec;
}

struct RegularityRow {
    double eps = 0.0;
    double norm = 0.0;  // weighted slab norm of the solution
    double data = 0.0;  // surrogate norm of u0 plus L2 norm of h on the slab
    double ratio = 0.0;
};

struct RegularityTable {
    std::vector<RegularityRow> rows;
    double spread = 0.0;  // max ratio / min ratio
};

namespace detail {

/// L2 norm of h over (t0, t0 + 1) x omega, trapezoid in t on `pieces` panels.
inline double slab_forcing_norm(const Forcing& h, double t0, int pieces = 256) {
    double acc = 0.0;
    Eigen::MatrixXd v;
    const double dt = 1.0 / pieces;
    const double hx = h.grid().h();
    for (int i = 0; i <= pieces; ++i) {
        eval_forcing_into(h, t0 + i * dt, v);
        const double w = (i == 0 || i == pieces) ? 0.5 : 1.0;
        acc += w * dt * hx * v.squaredNorm();
    }
    return std::sqrt(acc);
}

} // namespace detail

/// Ratio of the slab norm of the linear (f = 0) solution to its data norms,
/// for each eps; uniform boundedness in eps is the maximal-regularity claim.
inline RegularityTable regularity_probe(const std::vector<double>& eps_list, const Forcing& h, const Field& u0,
                                        const ProcessContext& ctx) {
    require(!eps_list.empty(), ErrorCode::InvalidArgument, "regularity_probe needs eps values");
    const double hnorm = detail::slab_forcing_norm(h, 0.0);
    require(l2_norm(u0) > 0.0 || hnorm > 0.0, ErrorCode::DegenerateData, "u0 and h both vanish");
    RegularityTable tab;
    ProcessContext lin = ctx;
    lin.nl = zero_nonlinearity(ctx.mats.k);
    lin.g = std::make_shared<const Forcing>(h);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double eps : eps_list) {
        lin.eps = eps;
        const double dt = lin.axial_step(1.0);
        const int m1 = static_cast<int>(std::lround(1.0 / dt));
        CylinderField u;
        if (eps == 0.0) {
            CylinderGrid cg(0.0, 1.0, m1, 0.0);
            u = detail::parabolic_march(lin.grid, cg, lin.mats, lin.nl, h, u0, lin.newton);
        } else {
            const ProcessSolve s = solve_process(u0, 0.0, 1.0, 1.0, lin);
            u = s.field;
        }
        RegularityRow row;
        row.eps = eps;
        row.norm = weighted_norm(u, 2.0, 0.0);
        row.data = surrogate_v_norm(u0, eps) + hnorm;
        row.ratio = row.norm / row.data;
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
        tab.rows.push_back(row);
    }
    tab.spread = hi / lo;
    return tab;
}

} // namespace ellab
