#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ellab/elliptic.hpp"
#include "ellab/equilibria.hpp"
#include "ellab/error.hpp"
#include "ellab/experiments.hpp"
#include "ellab/io/config.hpp"
#include "ellab/io/report.hpp"
#include "ellab/manifold.hpp"
#include "ellab/operators.hpp"
#include "ellab/parabolic.hpp"
#include "ellab/parallel.hpp"
#include "ellab/periodic.hpp"
#include "ellab/symbol.hpp"

namespace ellab::io {

struct RunOptions {
    std::optional<std::uint64_t> seed;
    bool fixed_clock = false;
};

/// Everything a study needs, built once from the configuration.
struct StudySetup {
    const ExperimentConfig& cfg;
    const StudyParams& p;
    SpatialGrid grid;
    int k = 1;
    std::uint64_t seed = 0;
    ProcessContext ctx;

    [[nodiscard]] ForcingPtr forcing(double eps) const { return build_forcing(cfg.forcing, grid, k, eps); }
    [[nodiscard]] Field profile(const ProfileSpec& s) const { return build_profile(s, grid, k); }
    [[nodiscard]] std::vector<double> eps_or(std::vector<double> fallback) const {
        return cfg.eps_list.empty() ? fallback : cfg.eps_list;
    }
    [[nodiscard]] ProcessContext at(double eps) const {
        ProcessContext c = ctx;
        c.eps = eps;
        c.g = forcing(eps);
        return c;
    }
    [[nodiscard]] EquilibriaOptions equilibria_options() const {
        EquilibriaOptions eo;
        eo.seed_count = p.seed_count;
        eo.dedup_tol = p.dedup_tol;
        eo.nu_min = p.nu_min;
        eo.seed = seed;
        return eo;
    }
    [[nodiscard]] ManifoldParams manifold_params() const {
        ManifoldParams mp;
        mp.radius = p.radius;
        mp.n_rays = p.n_rays;
        mp.refine = p.refine;
        mp.t_grow = p.t_grow;
        mp.stride = p.stride;
        mp.seed = seed;
        return mp;
    }
};

namespace detail {

inline Verdict flag(std::string name, const std::string& table, size_t row, bool ok, std::string detail = {}) {
    return compare(std::move(name), table, row, ok ? 1.0 : 0.0, "==", 1.0, std::move(detail));
}

inline void attach_fit(Table& t, const std::string& x, const std::string& y) {
    t.x_column = x;
    t.y_column = y;
    t.fit = rate_fit(t.numeric_column(x), t.numeric_column(y));
}

// ---- solve-elliptic -----------------------------------------------------

inline void trajectory_table(Report& r, const StudySetup& s, bool parabolic) {
    const Field u0 = s.profile(s.p.u0);
    const std::vector<double> eps_list = parabolic ? std::vector<double>{0.0} : s.eps_or({0.1});
    Table& t = r.add_table("trajectory", {"eps", "t", "l2_norm", "sup_norm", "lyapunov"});
    bool finite = true;
    for (double eps : eps_list) {
        ProcessContext c = s.at(eps);
        const Trajectory traj = process_trajectory(u0, 0.0, s.p.t_end, s.p.stride, c);
        Field gbar = Field::zero(s.grid, s.k);
        try {
            gbar = limit_mean(*c.g);
        } catch (const Error&) {
        }
        for (size_t i = 0; i < traj.size(); ++i) {
            double lyap = std::numeric_limits<double>::quiet_NaN();
            try {
                lyap = lyapunov_value(traj.states[i], c.mats, c.nl, gbar);
            } catch (const Error&) {
            }
            const double l2 = l2_norm(traj.states[i]);
            finite = finite && std::isfinite(l2);
            t.add_row({eps, traj.times[i], l2, sup_norm(traj.states[i]), lyap});
        }
    }
    r.verdicts.push_back(flag("solution_finite", t.name, t.rows.empty() ? 0 : t.rows.size() - 1, finite));
}

/// Diagnostics beside the elliptic trajectory: whether Newton from several
/// guesses lands on one solution, and the best exponent-condition margin.
/// Neither produces a verdict.
inline void elliptic_trajectory(Report& r, const StudySetup& s) {
    trajectory_table(r, s, false);
    const std::vector<double> eps_list = s.eps_or({0.1});
    const UniquenessRecord rec = uniqueness_probe(eps_list, s.profile(s.p.u0), s.p.t_end, s.at(eps_list.front()),
                                                  4, 1e-6, s.seed);
    Table& u = r.add_table("uniqueness", {"eps", "guesses", "converged", "max_spread", "agree"});
    for (const auto& row : rec.rows) {
        u.add_row({row.eps, static_cast<long long>(row.guesses), static_cast<long long>(row.converged), row.spread,
                   static_cast<long long>(row.agree)});
    }
    Table& us = r.add_table("uniqueness_summary", {"largest_agreeing_eps"});
    us.add_row({rec.largest_agreeing_eps.value_or(std::numeric_limits<double>::quiet_NaN())});
    Table& ec = r.add_table("exponent_condition", {"eps", "best_lambda0", "best_margin"});
    for (double eps : eps_list) {
        double best = -std::numeric_limits<double>::infinity(), arg = 0.0;
        for (int i = 0; i <= 120; ++i) {
            const double l0 = std::pow(10.0, -3.0 + 0.05 * i);
            const double m = exponent_condition_margin(s.ctx.mats, l0, s.ctx.nl.k_mono, eps);
            if (m > best) {
                best = m;
                arg = l0;
            }
        }
        ec.add_row({eps, arg, best});
    }
}

/// eps = 0 elliptic delegation against direct semigroup stepping.
inline void cross_oracle(Report& r, const StudySetup& s) {
    ProcessContext c = s.at(0.0);
    const Field u0 = s.profile(s.p.u0);
    const double dt = c.parabolic_dt;
    const int m = static_cast<int>(std::lround(s.p.t_end / dt));
    const CylinderGrid cg(0.0, m * dt, m, 0.0);
    const CylinderField ell = solve_truncated_bvp(s.grid, cg, c.mats, c.nl, c.forcing(), u0, c.far, c.newton);
    StepOptions so;
    so.dt = dt;
    so.newton = c.newton;
    const Trajectory par = semigroup_evolve(u0, m * dt, so, c.mats, c.nl, c.forcing());
    require(static_cast<int>(par.size()) == m + 1, ErrorCode::ShapeMismatch, "slice counts differ");
    Table& t = r.add_table("cross_oracle", {"t", "rel_gap"});
    const int every = std::max(1, static_cast<int>(std::lround(0.125 / dt)));
    double worst = 0.0;
    for (int i = 0; i <= m; ++i) {
        const Field& p = par.states[static_cast<size_t>(i)];
        const double ref = std::max(l2_norm(p), std::numeric_limits<double>::min());
        const double gap = l2_dist(ell.slice(i), p) / ref;
        worst = std::isfinite(gap) ? std::max(worst, gap) : std::numeric_limits<double>::infinity();
        if (i % every == 0 || i == m) t.add_row({cg.time(i), gap});
    }
    Table& sum = r.add_table("cross_oracle_summary", {"slices", "max_rel_gap"});
    const size_t row = sum.add_row({static_cast<long long>(m + 1), worst});
    r.verdicts.push_back(compare("max_rel_gap", sum.name, row, worst, "<=", s.p.rel_gap_max, "all slices"));
}

/// f = 0, u_tau = sin x: every slice is exp(mu t) sin x with the decaying
/// characteristic root mu of a (eps^2 mu^2 - 1) = gamma mu.
inline void modal(Report& r, const StudySetup& s) {
    require(s.k == 1, ErrorCode::InvalidArgument, "modal study needs k = 1");
    require(s.cfg.problem.nonlinearity.id == "zero", ErrorCode::InvalidArgument, "modal study needs f = 0");
    const double a = s.ctx.mats.a(0, 0), gam = s.ctx.mats.gamma(0, 0);
    const double t_len = s.p.t_len > 0.0 ? s.p.t_len : 2.0 * s.p.report_time;
    const int m = s.p.m_steps > 0 ? s.p.m_steps : 200;
    const Field u0 = Field::sine_mode(s.grid, 1, 1.0);
    Table& t = r.add_table("modal", {"eps", "mu", "t", "slice_error"});
    for (double eps : s.eps_or({0.2, 0.1, 0.05})) {
        ProcessContext c = s.at(eps);
        const CylinderGrid cg(0.0, t_len, m, eps);
        const int i = cg.index_of(s.p.report_time);
        require(i >= 0, ErrorCode::InvalidArgument, "report_time is not an axial node");
        const CylinderField u = solve_truncated_bvp(s.grid, cg, c.mats, c.nl, c.forcing(), u0, c.far, c.newton);
        const double mu = eps == 0.0 ? -a / gam
                                     : (gam - std::sqrt(gam * gam + 4.0 * a * a * eps * eps)) / (2.0 * a * eps * eps);
        const Field exact = std::exp(mu * cg.time(i)) * u0;
        const double err = l2_dist(u.slice(i), exact) / l2_norm(exact);
        const size_t row = t.add_row({eps, mu, cg.time(i), err});
        r.verdicts.push_back(compare("slice_error", t.name, row, err, "<=", s.p.slice_err_max));
    }
}

/// Divided differences of the solution map against the equation of variations.
inline void frechet(Report& r, const StudySetup& s) {
    require(s.p.deltas.size() >= 2, ErrorCode::InvalidArgument, "frechet study needs two deltas");
    const Field u0 = s.profile(s.p.u0);
    const Field xi = s.profile(s.p.xi);
    Table& t = r.add_table("frechet", {"eps", "delta", "error"});
    Table& q = r.add_table("frechet_ratio", {"eps", "ratio"});
    for (double eps : s.eps_or({0.1})) {
        ProcessContext c = s.at(eps);
        const double dt = c.axial_step(s.p.report_time);
        const int m_rep = static_cast<int>(std::lround(s.p.report_time / dt));
        const int m = eps == 0.0 ? m_rep : m_rep + std::max(2, static_cast<int>(std::ceil(c.margin / dt - 1e-9)));
        const CylinderGrid cg(0.0, m * dt, m, eps);
        const CylinderField base = solve_truncated_bvp(s.grid, cg, c.mats, c.nl, c.forcing(), u0, c.far, c.newton);
        const CylinderField v = variational_process(base, xi, c.mats, c.nl, c.far);
        std::vector<double> errs;
        for (double delta : s.p.deltas) {
            const CylinderField pert =
                solve_truncated_bvp(s.grid, cg, c.mats, c.nl, c.forcing(), u0 + delta * xi, c.far, c.newton, &base);
            double err = 0.0;
            for (int i = 0; i <= m_rep; ++i) {
                const Field dq = (1.0 / delta) * (pert.slice(i) - base.slice(i));
                err = std::max(err, l2_dist(dq, v.slice(i)));
            }
            errs.push_back(err);
            t.add_row({eps, delta, err});
        }
        for (size_t i = 1; i < errs.size(); ++i) {
            const double ratio = errs[i - 1] / errs[i];
            const size_t row = q.add_row({eps, ratio});
            r.verdicts.push_back(compare("ratio_lower", q.name, row, ratio, ">=", s.p.ratio_min));
            r.verdicts.push_back(compare("ratio_upper", q.name, row, ratio, "<=", s.p.ratio_max));
        }
    }
}

// ---- solve-parabolic ------------------------------------------------------

inline std::vector<Field> random_starts(const StudySetup& s, int count, double amplitude, int modes = 4) {
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Field> out;
    for (int i = 0; i < count; ++i) {
        Field u = Field::zero(s.grid, s.k);
        for (int c = 0; c < s.k; ++c)
            for (int j = 1; j <= modes; ++j) u += Field::sine_mode(s.grid, j, amplitude * uni(rng) / j, s.k, c);
        out.push_back(std::move(u));
    }
    return out;
}

/// Largest one-step increase of the Lyapunov function along random trajectories.
inline void lyapunov(Report& r, const StudySetup& s) {
    ProcessContext c = s.at(0.0);
    const Field gbar = limit_mean(*c.g);
    require(c.g->is_constant(), ErrorCode::InvalidArgument, "Lyapunov study needs autonomous forcing");
    const auto starts = random_starts(s, s.p.n_trajectories, s.p.amplitude);
    StepOptions so;
    so.dt = c.parabolic_dt;
    so.newton = c.newton;
    struct Row {
        double l0, l1, worst;
        long long steps;
    };
    const auto rows = parallel_map(starts.size(), [&](size_t i) {
        const Trajectory traj = semigroup_evolve(starts[i], s.p.t_end, so, c.mats, c.nl, *c.g);
        Row row{lyapunov_value(traj.states.front(), c.mats, c.nl, gbar), 0.0, -std::numeric_limits<double>::infinity(),
                static_cast<long long>(traj.size()) - 1};
        double prev = row.l0;
        for (size_t j = 1; j < traj.size(); ++j) {
            const double l = lyapunov_value(traj.states[j], c.mats, c.nl, gbar);
            row.worst = std::isfinite(l) ? std::max(row.worst, l - prev) : std::numeric_limits<double>::infinity();
            prev = l;
        }
        row.l1 = prev;
        return row;
    });
    Table& t = r.add_table("lyapunov", {"trajectory", "steps", "L_start", "L_end", "max_increase"});
    size_t worst_row = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rows.size(); ++i) {
        const size_t row = t.add_row({static_cast<long long>(i), rows[i].steps, rows[i].l0, rows[i].l1, rows[i].worst});
        if (!(rows[i].worst <= worst)) {
            worst = rows[i].worst;
            worst_row = row;
        }
    }
    r.verdicts.push_back(compare("max_lyapunov_increase", t.name, worst_row, worst, "<=", s.p.lyap_tol));
}

// ---- equilibria -----------------------------------------------------------

inline std::string index_list(const std::vector<EquilibriumRecord>& recs) {
    std::string out;
    for (size_t i = 0; i < recs.size(); ++i) out += (i ? "," : "") + std::to_string(recs[i].index);
    return out;
}

inline void census(Report& r, const StudySetup& s) {
    std::vector<double> lambdas = s.p.lambda_sweep;
    const bool sweep = !lambdas.empty();
    if (sweep) {
        require(s.cfg.problem.nonlinearity.id == "chafee_infante", ErrorCode::InvalidArgument,
                "lambda_sweep needs the chafee_infante nonlinearity");
    } else {
        lambdas.push_back(s.cfg.problem.nonlinearity.lambda);
    }
    const Field gbar = limit_mean(*s.forcing(0.0));
    Table& eq = r.add_table("equilibria", {"lambda", "id", "index", "l2_norm", "sin_projection", "gap_nu", "residual"});
    Table& cen = r.add_table("census", {"lambda", "count", "indices", "expected_count", "expected_indices"});
    const Field s1 = Field::sine_mode(s.grid, 1, 1.0, s.k, 0);
    for (size_t li = 0; li < lambdas.size(); ++li) {
        const Nonlinearity nl = sweep ? chafee_infante(lambdas[li], s.k) : s.ctx.nl;
        const auto recs = find_equilibria(s.ctx.mats, nl, gbar, s.equilibria_options());
        for (size_t i = 0; i < recs.size(); ++i) {
            eq.add_row({lambdas[li], static_cast<long long>(i), static_cast<long long>(recs[i].index), l2_norm(recs[i].z),
                        l2_inner(recs[i].z, s1), recs[i].gap_nu, recs[i].residual});
        }
        const long long expected_count =
            s.p.expected_counts.empty() ? -1 : static_cast<long long>(s.p.expected_counts[li]);
        std::string expected_idx;
        if (!s.p.expected_indices.empty()) {
            auto e = s.p.expected_indices[li];
            std::sort(e.rbegin(), e.rend());
            for (size_t i = 0; i < e.size(); ++i) expected_idx += (i ? "," : "") + std::to_string(e[i]);
        }
        const std::string got = index_list(recs);
        const size_t row = cen.add_row({lambdas[li], static_cast<long long>(recs.size()), got, expected_count, expected_idx});
        bool hyperbolic = !recs.empty();
        for (const auto& rec : recs) hyperbolic = hyperbolic && rec.hyperbolic;
        r.verdicts.push_back(flag("all_hyperbolic", cen.name, row, hyperbolic));
        if (expected_count >= 0) {
            r.verdicts.push_back(compare("count", cen.name, row, static_cast<double>(recs.size()), "==",
                                         static_cast<double>(expected_count)));
        }
        if (!s.p.expected_indices.empty()) {
            r.verdicts.push_back(flag("indices", cen.name, row, got == expected_idx, "expected " + expected_idx));
        }
    }
}

// ---- converge ---------------------------------------------------------------

inline void rate_verdicts(Report& r, const Table& t, const StudySetup& s) {
    const size_t last = t.rows.size() - 1;
    r.verdicts.push_back(compare("slope", t.name, last, t.fit->slope, ">=", s.p.min_slope));
    r.verdicts.push_back(compare("max_log_residual", t.name, last, t.fit->max_residual, "<=", s.p.max_log_residual));
}

inline void synthetic(Report& r, const StudySetup& s) {
    Table& t = r.add_table("rate", {"eps", "distance"});
    for (double eps : s.eps_or({0.2, 0.1, 0.05, 0.025})) t.add_row({eps, s.p.synthetic_scale * std::pow(eps, s.p.synthetic_exponent)});
    attach_fit(t, "eps", "distance");
    rate_verdicts(r, t, s);
}

inline void converge_trajectory(Report& r, const StudySetup& s) {
    const Field u0 = s.profile(s.p.u0);
    const auto eps_list = s.eps_or({0.2, 0.1, 0.05, 0.025});
    const auto gaps = parallel_map(eps_list.size(), [&](size_t i) {
        const double eps = eps_list[i];
        return trajectory_vs_limit(eps, s.forcing(eps), u0, s.p.t_end, s.ctx).sup;
    });
    Table& t = r.add_table("rate", {"eps", "sup_gap"});
    for (size_t i = 0; i < eps_list.size(); ++i) t.add_row({eps_list[i], gaps[i]});
    attach_fit(t, "eps", "sup_gap");
    rate_verdicts(r, t, s);
}

// ---- attractor ----------------------------------------------------------

inline void attractor_distance(Report& r, const StudySetup& s) {
    const auto eps_list = s.eps_or({0.2, 0.1, 0.05});
    const AttractorDistanceResult res =
        attractor_distance_experiment(eps_list, s.forcing(0.0), s.ctx, s.manifold_params(), s.equilibria_options());
    Table& t = r.add_table("attractor_distance", {"eps", "distance", "resolution", "points"});
    for (const auto& row : res.rows) t.add_row({row.eps, row.distance, row.resolution, static_cast<long long>(row.points)});
    Table& lim = r.add_table("limit_cloud", {"resolution"});
    lim.add_row({res.limit_resolution});
    if (t.rows.size() >= 3) attach_fit(t, "eps", "distance");
    const size_t last = t.rows.size() - 1;
    r.verdicts.push_back(flag("monotone_decrease", t.name, last, res.monotone));
    r.verdicts.push_back(compare("distance_at_smallest_eps", t.name, last, res.rows.back().distance, "<=", s.p.max_distance));
}

inline void heteroclinic(Report& r, const StudySetup& s) {
    ProcessContext c = s.at(0.0);
    const Field gbar = limit_mean(*c.g);
    c.g = Forcing::constant(gbar);
    const auto eqs = find_equilibria(c.mats, c.nl, gbar, s.equilibria_options());
    for (const auto& rec : eqs) require(rec.hyperbolic, ErrorCode::NonHyperbolicLimit, "non-hyperbolic equilibrium");
    const ManifoldSample sample = sample_attractor_manifolds(eqs, s.manifold_params(), c);
    std::vector<Field> zs;
    std::vector<double> lyap;
    for (const auto& rec : eqs) {
        zs.push_back(rec.z);
        lyap.push_back(lyapunov_value(rec.z, c.mats, c.nl, gbar));
    }
    Table& eqt = r.add_table("equilibria", {"id", "index", "l2_norm", "lyapunov"});
    for (size_t i = 0; i < eqs.size(); ++i) {
        eqt.add_row({static_cast<long long>(i), static_cast<long long>(eqs[i].index), l2_norm(eqs[i].z), lyap[i]});
    }
    Table& t = r.add_table("heteroclinic",
                           {"ray", "alpha", "omega", "alpha_velocity", "omega_velocity", "L_alpha", "L_omega", "distinct"});
    long long resolved = 0, same = 0;
    double worst_drop = -std::numeric_limits<double>::infinity();
    size_t worst_row = 0;
    for (size_t i = 0; i < sample.rays.size(); ++i) {
        const HeteroclinicReport h = heteroclinic_classify(sample.rays[i], zs, s.p.endpoint_tol);
        const long long a = h.alpha_limit ? *h.alpha_limit : -1;
        const long long o = h.omega_limit ? *h.omega_limit : -1;
        const double la = h.alpha_limit ? lyap[static_cast<size_t>(a)] : std::numeric_limits<double>::quiet_NaN();
        const double lo = h.omega_limit ? lyap[static_cast<size_t>(o)] : std::numeric_limits<double>::quiet_NaN();
        const size_t row = t.add_row({static_cast<long long>(i), a, o, h.alpha_velocity, h.omega_velocity, la, lo,
                                      static_cast<long long>(h.distinct)});
        if (h.alpha_limit && h.omega_limit) {
            ++resolved;
            if (!h.distinct) ++same;
            if (lo - la > worst_drop) {
                worst_drop = lo - la;
                worst_row = row;
            }
        }
    }
    Table& sum = r.add_table("heteroclinic_summary", {"rays", "resolved", "not_distinct", "max_L_change"});
    const size_t srow = sum.add_row({static_cast<long long>(sample.rays.size()), resolved, same, worst_drop});
    r.verdicts.push_back(compare("resolved_pairs", sum.name, srow, static_cast<double>(resolved), ">=", 1.0));
    r.verdicts.push_back(compare("endpoints_distinct", sum.name, srow, static_cast<double>(same), "==", 0.0));
    r.verdicts.push_back(compare("lyapunov_decreases", t.name, worst_row, worst_drop, "<", 0.0, "L(omega) - L(alpha)"));
}

inline void periodic(Report& r, const StudySetup& s) {
    const auto eps_list = s.eps_or({0.2, 0.1, 0.05});
    const Field gbar = limit_mean(*s.forcing(0.0));
    const auto eqs = find_equilibria(s.ctx.mats, s.ctx.nl, gbar, s.equilibria_options());
    Table& t = r.add_table("periodic", {"equilibrium", "index", "eps", "period", "residual", "iterations", "max_deviation"});
    for (size_t e = 0; e < eqs.size(); ++e) {
        const auto tracks = parallel_map(eps_list.size(), [&](size_t i) -> std::optional<PeriodicTrack> {
            try {
                return track_periodic_solution(eqs[e], s.forcing(eps_list[i]), eps_list[i], s.ctx);
            } catch (const Error&) {
                return std::nullopt;
            }
        });
        bool exist = true, monotone = true;
        double prev = std::numeric_limits<double>::infinity();
        size_t row = 0;
        for (size_t i = 0; i < eps_list.size(); ++i) {
            const auto& tr = tracks[i];
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row = t.add_row({static_cast<long long>(e), static_cast<long long>(eqs[e].index), eps_list[i],
                             tr ? tr->period : nan, tr ? tr->residual : nan,
                             tr ? static_cast<long long>(tr->iterations) : -1LL, tr ? tr->max_deviation : nan});
            exist = exist && tr.has_value();
            if (tr) {
                monotone = monotone && tr->max_deviation < prev;
                prev = tr->max_deviation;
            }
        }
        const std::string id = "eq" + std::to_string(e);
        r.verdicts.push_back(flag(id + "_fixed_points_exist", t.name, row, exist));
        r.verdicts.push_back(flag(id + "_deviation_monotone", t.name, row, exist && monotone));
    }
}

// ---- average --------------------------------------------------------------

inline void averaging(Report& r, const StudySetup& s) {
    const auto eps_list = s.eps_or({0.2, 0.1, 0.05});
    const Field zero = Field::zero(s.grid, s.k);
    const AveragingResult res = averaging_experiment(
        eps_list, [&](double eps) { return s.forcing(eps); }, zero, s.ctx, s.manifold_params(), s.equilibria_options(),
        s.p.window, s.p.avg_tol);
    Table& t = r.add_table("averaging", {"eps", "mean_norm", "distance", "reference_resolution"});
    for (const auto& row : res.rows) t.add_row({row.eps, row.mean_norm, row.distance, res.reference_resolution});
    const size_t last = t.rows.size() - 1;
    r.verdicts.push_back(flag("distance_nonincreasing", t.name, last, res.monotone));
    r.verdicts.push_back(compare("within_resolution", t.name, last, res.rows.back().distance, "<=", res.reference_resolution));
}

// ---- regularity-probe -----------------------------------------------------

inline void regularity(Report& r, const StudySetup& s) {
    const auto eps_list = s.eps_or({0.0, 0.05, 0.1, 0.2});
    const Field u0 = s.profile(s.p.u0);
    ProcessContext c = s.at(0.0);
    const RegularityTable tab = regularity_probe(eps_list, *s.forcing(0.0), u0, c);
    Table& t = r.add_table("regularity", {"eps", "norm", "data", "ratio"});
    for (const auto& row : tab.rows) t.add_row({row.eps, row.norm, row.data, row.ratio});
    Table& sum = r.add_table("regularity_summary", {"spread"});
    const size_t row = sum.add_row({tab.spread});
    r.verdicts.push_back(compare("ratio_spread", sum.name, row, tab.spread, "<=", s.p.spread_max));
}

inline void symbol(Report& r, const StudySetup& s) {
    const auto eps_list = s.eps_or({0.0, 0.01, 0.1, 1.0});
    Table& t = r.add_table("symbol", {"eps", "min_re", "min_ratio", "max_ratio"});
    const int n = s.p.xi_points;
    const double l0 = std::log(s.p.xi_min), l1 = std::log(s.p.xi_max);
    for (double eps : eps_list) {
        double min_re = std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int i = 0; i < n; ++i) {
            const double xi = std::exp(l0 + (l1 - l0) * i / (n - 1));
            const double z = 1.0 + xi * xi;
            const std::complex<double> a = symbol_A({z, 0.0}, s.p.alpha, s.p.beta, eps);
            min_re = std::min(min_re, a.real() / z);
            const double ratio = z / (std::sqrt(1.0 + eps * eps * z) * a.real());
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        const size_t row = t.add_row({eps, min_re, lo, hi});
        r.verdicts.push_back(compare("re_positive", t.name, row, min_re, ">", 0.0, "min Re A / (1 + xi^2)"));
        r.verdicts.push_back(compare("bracket_lower", t.name, row, lo, ">=", s.p.bracket_lo));
        r.verdicts.push_back(compare("bracket_upper", t.name, row, hi, "<=", s.p.bracket_hi));
    }
}

inline void dispatch(Report& r, const StudySetup& s) {
    const std::string key = s.cfg.kind + "/" + s.cfg.study;
    if (key == "solve-elliptic/trajectory") return elliptic_trajectory(r, s);
    if (key == "solve-elliptic/cross_oracle") return cross_oracle(r, s);
    if (key == "solve-elliptic/modal") return modal(r, s);
    if (key == "solve-elliptic/frechet") return frechet(r, s);
    if (key == "solve-parabolic/trajectory") return trajectory_table(r, s, true);
    if (key == "solve-parabolic/lyapunov") return lyapunov(r, s);
    if (key == "equilibria/census") return census(r, s);
    if (key == "converge/trajectory") return converge_trajectory(r, s);
    if (key == "converge/synthetic") return synthetic(r, s);
    if (key == "attractor/distance") return attractor_distance(r, s);
    if (key == "attractor/heteroclinic") return heteroclinic(r, s);
    if (key == "attractor/periodic") return periodic(r, s);
    if (key == "average/patchwork") return averaging(r, s);
    if (key == "regularity-probe/regularity") return regularity(r, s);
    if (key == "regularity-probe/symbol") return symbol(r, s);
    fail(ErrorCode::ValidationError, "study: no runner for " + key);
}

} // namespace detail

/// Runs the configured study. Module errors end the study with a failed
/// "completed" verdict that points at a row of the errors table.
inline Report run(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    const auto start = std::chrono::steady_clock::now();
    Report r;
    r.kind = cfg.kind;
    r.study = cfg.study;
    r.seed = opts.seed.value_or(cfg.seed);
    r.config = cfg.raw;
    r.started_at = opts.fixed_clock ? "fixed" : utc_timestamp();
    try {
        StudySetup s{cfg, cfg.params, SpatialGrid(cfg.problem.length, cfg.problem.n_interior), cfg.problem.k, r.seed, {}};
        s.ctx.mats = build_matrices(cfg.problem);
        s.ctx.nl = build_nonlinearity(cfg.problem.nonlinearity, cfg.problem.k);
        s.ctx.grid = s.grid;
        s.ctx.g = s.forcing(0.0);
        s.ctx.margin = cfg.solver.margin;
        s.ctx.dt = cfg.solver.dt;
        s.ctx.parabolic_dt = cfg.solver.parabolic_dt;
        s.ctx.newton = build_newton(cfg);
        s.ctx.warm_start = cfg.solver.warm_start;
        detail::dispatch(r, s);
    } catch (const Error& e) {
        Table& t = r.add_table("errors", {"study", "code", "message"});
        const size_t row = t.add_row({cfg.kind + "/" + cfg.study, std::string(to_string(e.code())), std::string(e.what())});
        r.verdicts.push_back(detail::flag("completed", t.name, row, false, e.what()));
    } catch (const std::exception& e) {
        Table& t = r.add_table("errors", {"study", "code", "message"});
        const size_t row = t.add_row({cfg.kind + "/" + cfg.study, std::string("Internal"), std::string(e.what())});
        r.verdicts.push_back(detail::flag("completed", t.name, row, false, e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.wall_clock_s = opts.fixed_clock ? 0.0 : secs;
    return r;
}

} // namespace ellab::io
