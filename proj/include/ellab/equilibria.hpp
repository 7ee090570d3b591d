#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ellab/coupling.hpp"
#include "ellab/error.hpp"
#include "ellab/field.hpp"
#include "ellab/linalg.hpp"
#include "ellab/newton.hpp"
#include "ellab/nonlinearity.hpp"
#include "ellab/operators.hpp"
#include "ellab/parabolic.hpp"

namespace ellab {

/// Hyperbolicity threshold on the discrete spectrum. At 128 nodes the
/// continuum-degenerate eigenvalue of the Chafee-Infante family at lambda = 1
/// is h^2/12 ~ 5e-5, so the threshold must sit above that.
inline constexpr double kNuMin = 1e-3;

struct EquilibriumRecord {
    Field z;
    std::vector<std::complex<double>> eigenvalues;  // sorted by real part, descending
    int index = 0;
    double gap_nu = 0.0;
    bool hyperbolic = false;
    double residual = 0.0;  // sup norm of a Delta z - f(z) - gbar
};

struct SpectralSplit {
    std::vector<Field> v_plus;  // L2-orthonormal
    Eigen::MatrixXd basis;      // same vectors, Euclidean-orthonormal columns (component-major)
    double invariance_defect = 0.0;
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(v_plus.size()); }
};

struct EquilibriaOptions {
    int seed_count = 64;   // random seeds on top of the structured ones
    bool deflation = true;
    double dedup_tol = 1e-4;
    double residual_tol = 1e-10;
    int max_modes = 6;
    std::vector<double> amplitudes{0.5, 1.0, 2.0, 4.0};
    std::uint64_t seed = 0;
    int max_iters = 100;
    double nu_min = kNuMin;
};

/// a Delta z - f(z) - gbar on the interior nodes.
inline Eigen::MatrixXd equilibrium_residual(const Eigen::MatrixXd& z, double h, const CouplingMatrices& mats,
                                            const Nonlinearity& nl, const Eigen::MatrixXd& gbar) {
    return laplacian(z, h) * mats.a.transpose() - nl.apply(z) - gbar;
}

/// Dense discretization of gamma^{-1}(a Delta - f'(z)) in component-major order.
inline Eigen::MatrixXd linearization_matrix(const Field& z, const CouplingMatrices& mats, const Nonlinearity& nl) {
    const int n = z.n();
    const int k = z.k();
    const double s = 1.0 / (z.grid().h() * z.grid().h());
    Eigen::MatrixXd op = Eigen::MatrixXd::Zero(n * k, n * k);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            const double arc = mats.a(r, c);
            for (int j = 0; j < n; ++j) {
                op(r * n + j, c * n + j) += -2.0 * s * arc;
                if (j > 0) op(r * n + j, c * n + j - 1) += s * arc;
                if (j + 1 < n) op(r * n + j, c * n + j + 1) += s * arc;
            }
        }
    }
    Eigen::MatrixXd jac;
    for (int j = 0; j < n; ++j) {
        nl.jacobian_at(z.values(), j, jac);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) op(r * n + j, c * n + j) -= jac(r, c);
    }
    const Eigen::MatrixXd ginv = mats.gamma.inverse();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * k, n * k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c)
            if (ginv(r, c) != 0.0) out.middleRows(r * n, n) += ginv(r, c) * op.middleRows(c * n, n);
    return out;
}

namespace detail {

inline bool nearly_symmetric(const Eigen::MatrixXd& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

/// Flip so that the first entry of noticeable size is positive.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double big = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-3 * big) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

} // namespace detail

/// Spectrum, instability index and hyperbolicity gap of an equilibrium.
inline EquilibriumRecord spectral_analyze(const Field& z, const CouplingMatrices& mats, const Nonlinearity& nl,
                                          double nu_min = kNuMin) {
    require(z.k() == mats.k, ErrorCode::ShapeMismatch, "equilibrium and matrices disagree on k");
    const Eigen::MatrixXd lz = linearization_matrix(z, mats, nl);
    EquilibriumRecord rec;
    rec.z = z;
    if (detail::nearly_symmetric(lz)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lz + lz.transpose()), Eigen::EigenvaluesOnly);
        require(es.info() == Eigen::Success, ErrorCode::EigenFailure, "symmetric eigensolver failed");
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rec.eigenvalues.emplace_back(es.eigenvalues()(i), 0.0);
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(lz, false);
        require(es.info() == Eigen::Success, ErrorCode::EigenFailure, "eigensolver failed");
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rec.eigenvalues.push_back(es.eigenvalues()(i));
    }
    std::stable_sort(rec.eigenvalues.begin(), rec.eigenvalues.end(), [](const auto& l, const auto& r) {
        if (l.real() != r.real()) return l.real() > r.real();
        return l.imag() > r.imag();
    });
    rec.gap_nu = std::numeric_limits<double>::infinity();
    for (const auto& ev : rec.eigenvalues) {
        if (ev.real() > 0.0) ++rec.index;
        rec.gap_nu = std::min(rec.gap_nu, std::abs(ev.real()));
    }
    rec.hyperbolic = rec.gap_nu > nu_min;
    return rec;
}

/// Orthonormal real basis of the unstable subspace of L_z.
inline SpectralSplit spectral_split(const EquilibriumRecord& rec, const CouplingMatrices& mats,
                                    const Nonlinearity& nl) {
    require(rec.hyperbolic, ErrorCode::NotHyperbolic, "spectral split needs a hyperbolic equilibrium");
    SpectralSplit out;
    const Field& z = rec.z;
    const int dim = z.n() * z.k();
    out.basis.resize(dim, 0);
    if (rec.index == 0) return out;
    const Eigen::MatrixXd lz = linearization_matrix(z, mats, nl);
    Eigen::MatrixXd raw(dim, 0);
    if (detail::nearly_symmetric(lz)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lz + lz.transpose()));
        require(es.info() == Eigen::Success, ErrorCode::EigenFailure, "symmetric eigensolver failed");
        // ascending order: the unstable ones are at the end
        raw = es.eigenvectors().rightCols(rec.index).rowwise().reverse();
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(lz, true);
        require(es.info() == Eigen::Success, ErrorCode::EigenFailure, "eigensolver failed");
        std::vector<Eigen::VectorXd> cols;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const auto ev = es.eigenvalues()(i);
            if (ev.real() <= 0.0 || ev.imag() < 0.0) continue;
            const Eigen::VectorXcd v = es.eigenvectors().col(i);
            cols.push_back(v.real());
            if (ev.imag() > 0.0) cols.push_back(v.imag());
        }
        raw.resize(dim, static_cast<Eigen::Index>(cols.size()));
        for (size_t c = 0; c < cols.size(); ++c) raw.col(static_cast<Eigen::Index>(c)) = cols[c];
    }
    require(raw.cols() == rec.index, ErrorCode::EigenFailure, "unstable eigenvector count differs from the index");
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, rec.index);
    for (int c = 0; c < rec.index; ++c) detail::fix_sign(q.col(c));
    out.basis = q;
    const Eigen::MatrixXd lp = lz * q;
    out.invariance_defect = (lp - q * (q.transpose() * lp)).norm();
    const double scale = 1.0 / std::sqrt(z.grid().h());
    for (int c = 0; c < rec.index; ++c) {
        Eigen::MatrixXd v = Eigen::Map<const Eigen::MatrixXd>(q.col(c).data(), z.n(), z.k()) * scale;
        out.v_plus.emplace_back(z.grid(), std::move(v));
    }
    return out;
}

namespace detail {

/// Banded Newton solve for a Delta z - f(z) - gbar = 0, optionally deflated
/// against known roots. Returns false if the iteration fails.
inline bool equilibrium_newton(Eigen::MatrixXd& z, double h, const CouplingMatrices& mats, const Nonlinearity& nl,
                               const Eigen::MatrixXd& gbar, const std::vector<Field>& known, bool deflate,
                               const EquilibriaOptions& opts) {
    const Eigen::Index n = z.rows();
    const Eigen::Index k = z.cols();
    auto deflation = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad_log) {
        double mult = 1.0;
        if (grad_log) grad_log->setZero(x.size());
        if (!deflate) return mult;
        const Eigen::MatrixXd zz = from_node_major(x, n, k);
        for (const auto& r : known) {
            const Eigen::MatrixXd d = zz - r.values();
            const double s = h * d.squaredNorm();
            mult *= 1.0 + 1.0 / s;
            if (grad_log) *grad_log -= (2.0 * h / (s * (s + 1.0))) * to_node_major(d);
        }
        return mult;
    };
    auto residual = [&](const Eigen::VectorXd& x) {
        const Eigen::MatrixXd zz = from_node_major(x, n, k);
        const Eigen::VectorXd r = to_node_major(equilibrium_residual(zz, h, mats, nl, gbar));
        return Eigen::VectorXd(deflation(x, nullptr) * r);
    };
    auto step = [&](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        const Eigen::MatrixXd zz = from_node_major(x, n, k);
        const Eigen::VectorXd r = to_node_major(equilibrium_residual(zz, h, mats, nl, gbar));
        // spatial_jacobian(.., 0, ..) factors -(a Delta - f'), so this solves J d0 = -r
        BandedLU lu = spatial_jacobian(zz, h, 0.0, mats, nl);
        Eigen::VectorXd d0 = r;
        lu.solve_in_place(d0);
        if (!deflate || known.empty()) return d0;
        Eigen::VectorXd gl;
        deflation(x, &gl);
        const double denom = 1.0 - gl.dot(d0);
        if (std::abs(denom) < 1e-14) fail(ErrorCode::SingularJacobian, "deflated step undefined");
        return Eigen::VectorXd(d0 / denom);
    };
    NewtonOptions no;
    no.tol_residual = opts.residual_tol;
    no.max_iters = opts.max_iters;
    Eigen::VectorXd x = to_node_major(z);
    try {
        newton_solve(x, residual, step, no);
    } catch (const Error&) {
        return false;
    }
    z = from_node_major(x, n, k);
    return z.allFinite();
}

inline std::vector<Eigen::MatrixXd> equilibrium_seeds(const SpatialGrid& grid, int k, const EquilibriaOptions& opts) {
    std::vector<Eigen::MatrixXd> seeds;
    seeds.push_back(Eigen::MatrixXd::Zero(grid.n_interior(), k));
    for (int j = 1; j <= opts.max_modes; ++j)
        for (double amp : opts.amplitudes)
            for (double sgn : {1.0, -1.0})
                for (int c = 0; c < k; ++c) seeds.push_back(Field::sine_mode(grid, j, sgn * amp, k, c).values());
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double amax = opts.amplitudes.empty() ? 1.0 : *std::max_element(opts.amplitudes.begin(), opts.amplitudes.end());
    for (int s = 0; s < opts.seed_count; ++s) {
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(grid.n_interior(), k);
        for (int c = 0; c < k; ++c)
            for (int j = 1; j <= opts.max_modes; ++j) {
                const double coef = amax * uni(rng) / j;
                v += Field::sine_mode(grid, j, coef, k, c).values();
            }
        seeds.push_back(std::move(v));
    }
    return seeds;
}

} // namespace detail

/// Equilibria of a Delta z - f(z) - gbar = 0 from structured and random seeds,
/// with deflation against the roots already found. Sorted by instability
/// index (descending), then by projection on the first sine mode (descending).
inline std::vector<EquilibriumRecord> find_equilibria(const CouplingMatrices& mats, const Nonlinearity& nl,
                                                      const Field& gbar, const EquilibriaOptions& opts = {}) {
    require(gbar.k() == mats.k && nl.k == mats.k, ErrorCode::ShapeMismatch, "component count mismatch");
    const SpatialGrid& grid = gbar.grid();
    const double h = grid.h();
    std::vector<Field> roots;
    for (Eigen::MatrixXd z : detail::equilibrium_seeds(grid, mats.k, opts)) {
        if (!detail::equilibrium_newton(z, h, mats, nl, gbar.values(), roots, opts.deflation, opts)) continue;
        // polish without deflation
        if (!detail::equilibrium_newton(z, h, mats, nl, gbar.values(), {}, false, opts)) continue;
        Field cand(grid, z);
        bool dup = false;
        for (const auto& r : roots) dup = dup || l2_dist(r, cand) <= opts.dedup_tol;
        if (!dup) roots.push_back(std::move(cand));
    }
    std::vector<EquilibriumRecord> out;
    for (const auto& r : roots) {
        EquilibriumRecord rec = spectral_analyze(r, mats, nl, opts.nu_min);
        rec.residual = equilibrium_residual(r.values(), h, mats, nl, gbar.values()).cwiseAbs().maxCoeff();
        out.push_back(std::move(rec));
    }
    const Field mode1 = Field::sine_mode(grid, 1, 1.0, mats.k, 0);
    auto proj = [&](const EquilibriumRecord& r) {
        double p = 0.0;
        for (int c = 0; c < mats.k; ++c) p += h * r.z.values().col(c).dot(mode1.values().col(0));
        return p;
    };
    std::stable_sort(out.begin(), out.end(), [&](const auto& l, const auto& r) {
        if (l.index != r.index) return l.index > r.index;
        return proj(l) > proj(r);
    });
    return out;
}

} // namespace ellab
