#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ellab/elliptic.hpp"
#include "ellab/equilibria.hpp"
#include "ellab/error.hpp"
#include "ellab/field.hpp"
#include "ellab/parallel.hpp"

namespace ellab {

/// Finite sample of a subset of L2(omega).
struct PointCloud {
    std::vector<Field> points;
    std::string label;

    [[nodiscard]] size_t size() const noexcept { return points.size(); }
    [[nodiscard]] bool empty() const noexcept { return points.empty(); }
    void add(Field f) {
        if (!points.empty()) points.front().check_shape(f);
        points.push_back(std::move(f));
    }
    void append(const PointCloud& o) {
        for (const auto& p : o.points) add(p);
    }
};

namespace detail {

inline Eigen::MatrixXd cloud_matrix(const PointCloud& c) {
    const Eigen::Index d = c.points.front().values().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(c.size()), d);
    for (size_t i = 0; i < c.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = c.points[i].flat().transpose();
    return m;
}

inline void check_clouds(const PointCloud& x, const PointCloud& y) {
    require(!x.empty() && !y.empty(), ErrorCode::EmptyCloud, "distance to or from an empty cloud");
    x.points.front().check_shape(y.points.front());
}

/// For every row of a, the nearest row of b (excluding the same index when
/// `skip_self`); distances are recomputed exactly for the chosen pair.
inline std::vector<double> nearest_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double h,
                                             bool skip_self) {
    const Eigen::VectorXd an = a.rowwise().squaredNorm();
    const Eigen::VectorXd bn = b.rowwise().squaredNorm();
    std::vector<double> out(static_cast<size_t>(a.rows()), std::numeric_limits<double>::infinity());
    constexpr Eigen::Index block = 256;
    for (Eigen::Index r0 = 0; r0 < a.rows(); r0 += block) {
        const Eigen::Index rn = std::min(block, a.rows() - r0);
        const Eigen::MatrixXd g = a.middleRows(r0, rn) * b.transpose();
        for (Eigen::Index i = 0; i < rn; ++i) {
            Eigen::Index best = -1;
            double best_v = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < b.rows(); ++j) {
                if (skip_self && j == r0 + i) continue;
                const double v = an(r0 + i) + bn(j) - 2.0 * g(i, j);
                if (v < best_v) {
                    best_v = v;
                    best = j;
                }
            }
            if (best >= 0) {
                out[static_cast<size_t>(r0 + i)] = std::sqrt(h * (a.row(r0 + i) - b.row(best)).squaredNorm());
            }
        }
    }
    return out;
}

} // namespace detail

/// sup_{x in X} inf_{y in Y} ||x - y||_{L2}.
inline double hausdorff_dist(const PointCloud& x, const PointCloud& y) {
    detail::check_clouds(x, y);
    const double h = x.points.front().grid().h();
    const auto d = detail::nearest_distances(detail::cloud_matrix(x), detail::cloud_matrix(y), h, false);
    return *std::max_element(d.begin(), d.end());
}

inline double symmetric_dist(const PointCloud& x, const PointCloud& y) {
    return std::max(hausdorff_dist(x, y), hausdorff_dist(y, x));
}

/// Largest nearest-neighbour spacing inside the cloud (0 for one point).
inline double cloud_resolution(const PointCloud& x) {
    require(!x.empty(), ErrorCode::EmptyCloud, "resolution of an empty cloud");
    if (x.size() == 1) return 0.0;
    const double h = x.points.front().grid().h();
    const Eigen::MatrixXd m = detail::cloud_matrix(x);
    const auto d = detail::nearest_distances(m, m, h, true);
    return *std::max_element(d.begin(), d.end());
}

struct ManifoldParams {
    /// 0 picks 1e-3 ||z|| + 1e-3.
    double radius = 0.0;
    /// Rays per unstable direction.
    int n_rays = 16;
    double t_grow = 20.0;
    double stride = 0.25;
    double tau = 0.0;
    std::uint64_t seed = 0;
    /// Chord points inserted between consecutive ray samples; their distance
    /// to the manifold is O(spacing^2 * curvature), far below the spacing.
    int refine = 0;
};

struct ManifoldSample {
    PointCloud cloud;
    std::vector<Trajectory> rays;
};

namespace detail {

/// Ray start offsets in the unstable subspace. For one direction the rays are
/// split between +v and -v and their radii are staggered by a fraction of the
/// sampling stride in growth time, so that the union samples the curve
/// uniformly finer than a single ray would.
inline std::vector<Field> ray_offsets(const EquilibriumRecord& rec, const SpectralSplit& split,
                                      const ManifoldParams& p, double radius) {
    std::vector<Field> out;
    const int d = split.dim();
    if (d == 1) {
        const int per_side = std::max(1, p.n_rays / 2);
        const double sigma = rec.eigenvalues.front().real();
        for (double sgn : {1.0, -1.0}) {
            for (int q = 0; q < per_side; ++q) {
                const double r = radius * std::exp(sigma * p.stride * q / per_side);
                out.push_back(sgn * r * split.v_plus[0]);
            }
        }
        return out;
    }
    const int count = p.n_rays * d;
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int q = 0; q < count; ++q) {
        Eigen::VectorXd c(d);
        if (d == 2) {
            const double th = 2.0 * std::numbers::pi * q / count;
            c << std::cos(th), std::sin(th);
        } else {
            for (int i = 0; i < d; ++i) c(i) = nd(rng);
            c.normalize();
        }
        Field off = Field::zero(rec.z.grid(), rec.z.k());
        for (int i = 0; i < d; ++i) off += c(i) * split.v_plus[static_cast<size_t>(i)];
        out.push_back(radius * off);
    }
    return out;
}

} // namespace detail

/// Forward-evolved rays leaving z along its unstable directions. The context
/// selects the eps-process (eps > 0) or the limit flow (eps = 0).
inline ManifoldSample unstable_manifold_sample(const EquilibriumRecord& rec, const SpectralSplit& split,
                                               const ManifoldParams& p, const ProcessContext& ctx) {
    require(rec.hyperbolic, ErrorCode::NotHyperbolic, "manifold sampling needs a hyperbolic equilibrium");
    require(split.dim() == rec.index, ErrorCode::ShapeMismatch, "split does not match the record");
    ManifoldSample out;
    out.cloud.label = "unstable manifold";
    out.cloud.add(rec.z);
    if (rec.index == 0) return out;
    const double radius = p.radius > 0.0 ? p.radius : 1e-3 * l2_norm(rec.z) + 1e-3;
    const auto offsets = detail::ray_offsets(rec, split, p, radius);
    out.rays = parallel_map(offsets.size(), [&](size_t i) {
        return process_trajectory(rec.z + offsets[i], p.tau, p.t_grow, p.stride, ctx);
    });
    for (const auto& ray : out.rays) {
        for (size_t i = 0; i < ray.size(); ++i) {
            if (i > 0) {
                for (int q = 1; q <= p.refine; ++q) {
                    const double w = static_cast<double>(q) / (p.refine + 1);
                    out.cloud.add((1.0 - w) * ray.states[i - 1] + w * ray.states[i]);
                }
            }
            out.cloud.add(ray.states[i]);
        }
    }
    return out;
}

/// Attractor sample as the union of unstable manifolds of the given
/// equilibria (all must be hyperbolic), plus the equilibria themselves.
inline ManifoldSample sample_attractor_manifolds(const std::vector<EquilibriumRecord>& eqs,
                                                 const ManifoldParams& p, const ProcessContext& ctx) {
    require(!eqs.empty(), ErrorCode::InvalidArgument, "manifold route needs equilibria");
    ManifoldSample out;
    out.cloud.label = ctx.eps == 0.0 ? "limit attractor" : "eps attractor";
    for (const auto& rec : eqs) {
        require(rec.hyperbolic, ErrorCode::NotHyperbolic, "non-hyperbolic equilibrium in the attractor sample");
        const SpectralSplit split = spectral_split(rec, ctx.mats, ctx.nl);
        ManifoldSample part = unstable_manifold_sample(rec, split, p, ctx);
        out.cloud.append(part.cloud);
        for (auto& r : part.rays) out.rays.push_back(std::move(r));
    }
    return out;
}

struct NetParams {
    int n_initial = 16;
    double amplitude = 2.0;
    int modes = 4;
    double t_transient = 10.0;
    double t_keep = 5.0;
    double stride = 0.25;
    std::uint64_t seed = 0;
};

/// Attractor sample as long-run slices of a net of random initial data.
inline PointCloud sample_attractor_net(const NetParams& p, const ProcessContext& ctx) {
    std::mt19937_64 rng(p.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Field> starts;
    for (int s = 0; s < p.n_initial; ++s) {
        Field u = Field::zero(ctx.grid, ctx.mats.k);
        for (int c = 0; c < ctx.mats.k; ++c)
            for (int j = 1; j <= p.modes; ++j) u += Field::sine_mode(ctx.grid, j, p.amplitude * uni(rng) / j, ctx.mats.k, c);
        starts.push_back(std::move(u));
    }
    const auto trajs = parallel_map(starts.size(), [&](size_t i) {
        return process_trajectory(starts[i], 0.0, p.t_transient + p.t_keep, p.stride, ctx);
    });
    PointCloud cloud;
    cloud.label = "net attractor";
    for (const auto& t : trajs)
        for (size_t i = 0; i < t.size(); ++i)
            if (t.times[i] >= p.t_transient - 1e-9) cloud.add(t.states[i]);
    return cloud;
}

struct HeteroclinicReport {
    std::optional<int> alpha_limit;
    std::optional<int> omega_limit;
    bool distinct = false;
    double alpha_velocity = 0.0;
    double omega_velocity = 0.0;
};

namespace detail {

inline size_t sample_near(const Trajectory& t, double time) {
    size_t best = 0;
    for (size_t i = 1; i < t.size(); ++i)
        if (std::abs(t.times[i] - time) < std::abs(t.times[best] - time)) best = i;
    return best;
}

inline std::optional<int> nearest_equilibrium(const Field& u, const std::vector<Field>& eqs, double tol) {
    std::optional<int> best;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < eqs.size(); ++i) {
        const double d = l2_dist(u, eqs[i]);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(i);
        }
    }
    if (bd > tol) return std::nullopt;
    return best;
}

} // namespace detail

/// End-point classification: an end is resolved when the window velocity
/// ||u(t+1) - u(t)|| is below tol and an equilibrium lies within tol.
inline HeteroclinicReport heteroclinic_classify(const Trajectory& traj, const std::vector<Field>& equilibria,
                                                double tol) {
    require(!traj.empty(), ErrorCode::InvalidArgument, "empty trajectory");
    HeteroclinicReport rep;
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    const Field& first = traj.states.front();
    const Field& last = traj.states.back();
    if (t1 - t0 >= 1.0 - 1e-9) {
        const Field& a1 = traj.states[detail::sample_near(traj, t0 + 1.0)];
        const Field& o1 = traj.states[detail::sample_near(traj, t1 - 1.0)];
        rep.alpha_velocity = l2_dist(a1, first);
        rep.omega_velocity = l2_dist(last, o1);
    } else {
        rep.alpha_velocity = rep.omega_velocity = std::numeric_limits<double>::infinity();
    }
    if (rep.alpha_velocity <= tol) rep.alpha_limit = detail::nearest_equilibrium(first, equilibria, tol);
    if (rep.omega_velocity <= tol) rep.omega_limit = detail::nearest_equilibrium(last, equilibria, tol);
    rep.distinct = rep.alpha_limit && rep.omega_limit && *rep.alpha_limit != *rep.omega_limit;
    return rep;
}

} // namespace ellab
