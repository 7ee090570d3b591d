#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ellab/elliptic.hpp"
#include "ellab/equilibria.hpp"
#include "ellab/error.hpp"
#include "ellab/forcing.hpp"
#include "ellab/manifold.hpp"
#include "ellab/parabolic.hpp"

namespace ellab {

/// Least-squares line log d = slope log eps + intercept.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;  // worst absolute log-residual
};

inline RateFit rate_fit(const std::vector<double>& eps, const std::vector<double>& dist) {
    require(eps.size() == dist.size(), ErrorCode::InvalidArgument, "rate_fit needs paired data");
    require(eps.size() >= 3, ErrorCode::InvalidArgument, "rate_fit needs at least three points");
    for (size_t i = 0; i < eps.size(); ++i) {
        require(eps[i] > 0.0 && dist[i] > 0.0 && std::isfinite(eps[i]) && std::isfinite(dist[i]),
                ErrorCode::NonPositiveData, "rate_fit needs positive finite data");
    }
    const auto n = static_cast<Eigen::Index>(eps.size());
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = std::log(eps[static_cast<size_t>(i)]);
        a(i, 1) = 1.0;
        b(i) = std::log(dist[static_cast<size_t>(i)]);
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
    RateFit fit;
    fit.slope = coef(0);
    fit.intercept = coef(1);
    fit.max_residual = (a * coef - b).cwiseAbs().maxCoeff();
    return fit;
}

/// Time average of g over windows doubled from `window` until two
/// successive averages agree to `tol` in L2.
inline Field converged_average(const Forcing& g, double window, double tol, int max_doublings = 12) {
    if (g.is_constant()) return time_average(g, 0.0, window);
    Field prev = time_average(g, 0.0, window);
    for (int d = 0; d < max_doublings; ++d) {
        window *= 2.0;
        Field next = time_average(g, 0.0, window);
        if (l2_dist(next, prev) <= tol) return next;
        prev = std::move(next);
    }
    fail(ErrorCode::AverageNotConverged, "time average did not settle under window doubling");
}

/// Mean forcing of the limit problem: exact for constant and periodic
/// families, window doubling otherwise.
inline Field limit_mean(const Forcing& g, double tol = 1e-6) {
    if (g.is_constant()) return std::get<ConstantForcing>(g.v).mean;
    const double period = forcing_period(g);
    if (period > 0.0) return time_average(g, 0.0, 64.0 * period);
    return converged_average(g, 64.0, tol);
}

struct GapSeries {
    std::vector<double> times;
    std::vector<double> gaps;
    double sup = 0.0;
};

/// ||U^eps(t, 0) u0 - S_t u0|| on the shared slices t = 0, stride, ..., t_end,
/// where S_t is the limit flow driven by the mean of g.
inline GapSeries trajectory_vs_limit(double eps, const ForcingPtr& g, const Field& u0, double t_end,
                                     const ProcessContext& base_ctx, double stride = 1.0 / 16.0) {
    require(eps >= 0.0, ErrorCode::InvalidArgument, "eps must be nonnegative");
    ProcessContext ctx = base_ctx;
    ctx.eps = eps;
    ctx.g = g;
    ProcessContext lim = base_ctx;
    lim.eps = 0.0;
    lim.g = eps == 0.0 ? g : Forcing::constant(limit_mean(*g));
    const Trajectory a = process_trajectory(u0, 0.0, t_end, stride, ctx);
    const Trajectory b = eps == 0.0 ? a : process_trajectory(u0, 0.0, t_end, stride, lim);
    require(a.size() == b.size(), ErrorCode::ShapeMismatch, "trajectories do not share slices");
    GapSeries out;
    for (size_t i = 0; i < a.size(); ++i) {
        out.times.push_back(a.times[i]);
        out.gaps.push_back(l2_dist(a.states[i], b.states[i]));
        out.sup = std::max(out.sup, out.gaps.back());
    }
    return out;
}

/// Limit attractor of gamma u_t = a Delta u - f(u) - gbar sampled by the
/// unstable-manifold route.
struct LimitAttractor {
    std::vector<EquilibriumRecord> equilibria;
    ManifoldSample sample;
};

inline LimitAttractor limit_attractor(const Field& gbar, const ProcessContext& base_ctx, const ManifoldParams& mp,
                                      const EquilibriaOptions& eo) {
    LimitAttractor out;
    out.equilibria = find_equilibria(base_ctx.mats, base_ctx.nl, gbar, eo);
    for (const auto& r : out.equilibria) {
        require(r.hyperbolic, ErrorCode::NonHyperbolicLimit,
                "limit equilibrium with gap " + std::to_string(r.gap_nu) + " is not hyperbolic");
    }
    ProcessContext ctx = base_ctx;
    ctx.eps = 0.0;
    ctx.g = Forcing::constant(gbar);
    out.sample = sample_attractor_manifolds(out.equilibria, mp, ctx);
    return out;
}

struct AttractorDistanceRow {
    double eps = 0.0;
    double distance = 0.0;
    double resolution = 0.0;  // of the eps cloud
    size_t points = 0;
};

struct AttractorDistanceResult {
    std::vector<AttractorDistanceRow> rows;
    double limit_resolution = 0.0;
    RateFit fit;
    bool monotone = false;
};

/// Symmetric distance between eps-clouds (unstable manifolds of the limit
/// equilibria under the eps-process driven by g) and the limit cloud.
inline AttractorDistanceResult attractor_distance_experiment(const std::vector<double>& eps_list, const ForcingPtr& g,
                                                             const ProcessContext& base_ctx, const ManifoldParams& mp,
                                                             const EquilibriaOptions& eo) {
    require(!eps_list.empty(), ErrorCode::InvalidArgument, "no eps values");
    const Field gbar = limit_mean(*g);
    const LimitAttractor lim = limit_attractor(gbar, base_ctx, mp, eo);
    AttractorDistanceResult out;
    out.limit_resolution = cloud_resolution(lim.sample.cloud);
    for (double eps : eps_list) {
        require(eps > 0.0, ErrorCode::InvalidArgument, "attractor distance needs eps > 0");
        ProcessContext ctx = base_ctx;
        ctx.eps = eps;
        ctx.g = g;
        const ManifoldSample s = sample_attractor_manifolds(lim.equilibria, mp, ctx);
        AttractorDistanceRow row;
        row.eps = eps;
        row.distance = symmetric_dist(s.cloud, lim.sample.cloud);
        row.resolution = cloud_resolution(s.cloud);
        row.points = s.cloud.size();
        out.rows.push_back(row);
    }
    out.monotone = true;
    for (size_t i = 1; i < out.rows.size(); ++i) out.monotone = out.monotone && out.rows[i].distance < out.rows[i - 1].distance;
    if (out.rows.size() >= 3) {
        std::vector<double> e, d;
        for (const auto& r : out.rows) {
            e.push_back(r.eps);
            d.push_back(r.distance);
        }
        out.fit = rate_fit(e, d);
    }
    return out;
}

struct AveragingRow {
    double eps = 0.0;
    double mean_norm = 0.0;  // ||gbar_eps||
    double distance = 0.0;   // symmetric distance to the reference limit attractor
};

struct AveragingResult {
    std::vector<AveragingRow> rows;
    double reference_resolution = 0.0;
    bool monotone = false;
};

/// For each eps the mean of g_eps over [0, window] (window doubled until
/// settled) defines a limit problem; its attractor is compared with the
/// attractor of the reference mean.
inline AveragingResult averaging_experiment(const std::vector<double>& eps_list,
                                            const std::function<ForcingPtr(double)>& family, const Field& reference_mean,
                                            const ProcessContext& base_ctx, const ManifoldParams& mp,
                                            const EquilibriaOptions& eo, double window, double avg_tol) {
    const LimitAttractor ref = limit_attractor(reference_mean, base_ctx, mp, eo);
    AveragingResult out;
    out.reference_resolution = cloud_resolution(ref.sample.cloud);
    for (double eps : eps_list) {
        const ForcingPtr g = family(eps);
        const Field gbar = converged_average(*g, window, avg_tol);
        const LimitAttractor a = limit_attractor(gbar, base_ctx, mp, eo);
        AveragingRow row;
        row.eps = eps;
        row.mean_norm = l2_norm(gbar);
        row.distance = symmetric_dist(a.sample.cloud, ref.sample.cloud);
        out.rows.push_back(row);
    }
    out.monotone = true;
    for (size_t i = 1; i < out.rows.size(); ++i)
        out.monotone = out.monotone && out.rows[i].distance <= out.rows[i - 1].distance;
    return out;
}

/// Surrogate norms of a discrete cascade from each start over `steps` unit
/// steps; the absorbing radius is the largest value over the second half.
struct AbsorbingProbe {
    std::vector<std::vector<double>> norms;
    double radius = 0.0;
};

inline AbsorbingProbe absorbing_probe(const std::vector<Field>& starts, int steps, const ProcessContext& ctx) {
    AbsorbingProbe out;
    for (const auto& u0 : starts) {
        std::vector<double> row{surrogate_v_norm(u0, ctx.eps)};
        Field u = u0;
        for (int s = 0; s < steps; ++s) {
            u = process_map(u, s, s + 1, ctx);
            row.push_back(surrogate_v_norm(u, ctx.eps));
        }
        for (size_t i = row.size() / 2; i < row.size(); ++i) out.radius = std::max(out.radius, row[i]);
        out.norms.push_back(std::move(row));
    }
    return out;
}

} // namespace ellab
