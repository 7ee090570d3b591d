#pragma once

#include <algorithm>
#include <cmath>

#include "ellab/error.hpp"

namespace ellab {

/// Largest admissible singular-perturbation parameter.
inline constexpr double kEpsMax = 1.0;

/// Uniform grid on the interval (0, length) with homogeneous Dirichlet ends.
/// Only the interior nodes x_j = (j+1) h, j = 0..n-1 carry unknowns.
class SpatialGrid {
public:
    SpatialGrid() = default;
    SpatialGrid(double length, int n_interior) : length_(length), n_(n_interior) {
        require(std::isfinite(length) && length > 0.0, ErrorCode::InvalidArgument,
                "spatial grid length must be positive");
        require(n_interior >= 1, ErrorCode::InvalidArgument, "spatial grid needs at least one interior node");
    }

    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] int n_interior() const noexcept { return n_; }
    [[nodiscard]] double h() const noexcept { return length_ / (n_ + 1); }
    [[nodiscard]] double node(int j) const noexcept { return (j + 1) * h(); }

    friend bool operator==(const SpatialGrid& l, const SpatialGrid& r) {
        return l.n_ == r.n_ && l.length_ == r.length_;
    }

private:
    double length_ = 1.0;
    int n_ = 1;
};

/// Truncated cylinder (tau, tau + t_len) in the axial variable together with
/// the perturbation parameter eps.
class CylinderGrid {
public:
    CylinderGrid() = default;
    CylinderGrid(double tau, double t_len, int m_steps, double eps)
        : tau_(tau), t_len_(t_len), m_(m_steps), eps_(eps) {
        require(std::isfinite(tau), ErrorCode::InvalidArgument, "tau must be finite");
        require(std::isfinite(t_len) && t_len > 0.0, ErrorCode::InvalidArgument, "t_len must be positive");
        require(m_steps >= 1, ErrorCode::InvalidArgument, "m_steps must be positive");
        require(eps >= 0.0 && eps <= kEpsMax, ErrorCode::InvalidArgument, "eps outside [0, eps_max]");
    }

    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] double t_len() const noexcept { return t_len_; }
    [[nodiscard]] int m_steps() const noexcept { return m_; }
    [[nodiscard]] double eps() const noexcept { return eps_; }
    [[nodiscard]] double dt() const noexcept { return t_len_ / m_; }
    [[nodiscard]] double time(int i) const noexcept { return tau_ + i * dt(); }
    [[nodiscard]] double t_end() const noexcept { return tau_ + t_len_; }

    /// Index of the node closest to t, or -1 if t lies off the grid by more than tol * dt.
    [[nodiscard]] int index_of(double t, double tol = 1e-6) const noexcept {
        const double s = (t - tau_) / dt();
        const double r = std::round(s);
        if (std::abs(s - r) > tol || r < 0 || r > m_) {
            return -1;
        }
        return static_cast<int>(r);
    }

    friend bool operator==(const CylinderGrid& l, const CylinderGrid& r) {
        return l.tau_ == r.tau_ && l.t_len_ == r.t_len_ && l.m_ == r.m_ && l.eps_ == r.eps_;
    }

private:
    double tau_ = 0.0;
    double t_len_ = 1.0;
    int m_ = 1;
    double eps_ = 0.0;
};

/// Axial step used by the space-time solver when none is prescribed:
/// eps/4 so that the eps^2 d_t^2 term is resolved, capped at 1/64.
inline double default_axial_step(double eps) { return std::min(eps / 4.0, 1.0 / 64.0); }

/// Largest step <= target that divides `stride` into an integer number of pieces.
inline double aligned_step(double target, double stride) {
    require(target > 0.0 && stride > 0.0, ErrorCode::InvalidArgument, "aligned_step needs positive inputs");
    const double pieces = std::ceil(stride / target - 1e-9);
    return stride / std::max(1.0, pieces);
}

} // namespace ellab
