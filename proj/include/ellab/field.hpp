#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "ellab/error.hpp"
#include "ellab/grid.hpp"

namespace ellab {

/// Spatial profile with k components on the interior nodes of a SpatialGrid.
/// Values are stored n_interior x k, column-major, so the flat view is
/// component-major: index = c * n + j.
class Field {
public:
    Field() = default;
    Field(SpatialGrid grid, int k) : grid_(grid), values_(Eigen::MatrixXd::Zero(grid.n_interior(), k)) {
        require(k >= 1, ErrorCode::InvalidArgument, "field needs at least one component");
    }
    Field(SpatialGrid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
        require(values_.rows() == grid_.n_interior(), ErrorCode::ShapeMismatch,
                "field rows do not match the grid");
        require(values_.cols() >= 1, ErrorCode::ShapeMismatch, "field needs at least one component");
        require(values_.allFinite(), ErrorCode::NonFiniteValue, "field has non-finite entries");
    }

    static Field zero(SpatialGrid grid, int k = 1) { return Field(grid, k); }

    /// amplitude * sin(mode * pi * x / length) in one component.
    static Field sine_mode(SpatialGrid grid, int mode, double amplitude = 1.0, int k = 1, int component = 0) {
        Field f(grid, k);
        const double w = mode * std::numbers::pi / grid.length();
        for (int j = 0; j < grid.n_interior(); ++j) {
            f.values_(j, component) = amplitude * std::sin(w * grid.node(j));
        }
        return f;
    }

    static Field from_function(SpatialGrid grid, int k, const std::function<double(double, int)>& fn) {
        Field f(grid, k);
        for (int c = 0; c < k; ++c) {
            for (int j = 0; j < grid.n_interior(); ++j) {
                f.values_(j, c) = fn(grid.node(j), c);
            }
        }
        require(f.values_.allFinite(), ErrorCode::NonFiniteValue, "profile function returned non-finite values");
        return f;
    }

    [[nodiscard]] const SpatialGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int k() const noexcept { return static_cast<int>(values_.cols()); }
    [[nodiscard]] int n() const noexcept { return static_cast<int>(values_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::MatrixXd& values() noexcept { return values_; }
    [[nodiscard]] double operator()(int j, int c = 0) const { return values_(j, c); }
    [[nodiscard]] double& operator()(int j, int c = 0) { return values_(j, c); }

    [[nodiscard]] Eigen::Map<const Eigen::VectorXd> flat() const {
        return {values_.data(), values_.size()};
    }
    [[nodiscard]] Eigen::Map<Eigen::VectorXd> flat() { return {values_.data(), values_.size()}; }

    [[nodiscard]] bool same_shape(const Field& o) const noexcept {
        return grid_ == o.grid_ && values_.cols() == o.values_.cols();
    }

    Field& operator+=(const Field& o) {
        check_shape(o);
        values_ += o.values_;
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_shape(o);
        values_ -= o.values_;
        return *this;
    }
    Field& operator*=(double s) {
        values_ *= s;
        return *this;
    }
    friend Field operator+(Field l, const Field& r) { return l += r; }
    friend Field operator-(Field l, const Field& r) { return l -= r; }
    friend Field operator*(double s, Field f) { return f *= s; }
    friend Field operator*(Field f, double s) { return f *= s; }
    friend Field operator-(Field f) { return f *= -1.0; }

    void check_shape(const Field& o) const {
        require(same_shape(o), ErrorCode::ShapeMismatch, "fields live on different grids or component counts");
    }

private:
    SpatialGrid grid_;
    Eigen::MatrixXd values_;
};

/// Discrete L2(omega) norm: trapezoid rule with the Dirichlet end values.
inline double l2_norm(const Field& u) { return std::sqrt(u.grid().h() * u.values().squaredNorm()); }

inline double l2_dist(const Field& u, const Field& v) {
    u.check_shape(v);
    return std::sqrt(u.grid().h() * (u.values() - v.values()).squaredNorm());
}

inline double l2_inner(const Field& u, const Field& v) {
    u.check_shape(v);
    return u.grid().h() * (u.values().array() * v.values().array()).sum();
}

inline double sup_norm(const Field& u) { return u.values().cwiseAbs().maxCoeff(); }

/// Space-time grid function on a truncated cylinder; slice i lives at cgrid.time(i).
class CylinderField {
public:
    CylinderField() = default;
    CylinderField(SpatialGrid sgrid, CylinderGrid cgrid, int k)
        : sgrid_(sgrid), cgrid_(cgrid), k_(k),
          slices_(static_cast<size_t>(cgrid.m_steps() + 1), Eigen::MatrixXd::Zero(sgrid.n_interior(), k)) {
        require(k >= 1, ErrorCode::InvalidArgument, "cylinder field needs at least one component");
    }

    [[nodiscard]] const SpatialGrid& sgrid() const noexcept { return sgrid_; }
    [[nodiscard]] const CylinderGrid& cgrid() const noexcept { return cgrid_; }
    [[nodiscard]] int k() const noexcept { return k_; }
    [[nodiscard]] int m_steps() const noexcept { return cgrid_.m_steps(); }

    [[nodiscard]] const Eigen::MatrixXd& at(int i) const { return slices_.at(static_cast<size_t>(i)); }
    [[nodiscard]] Eigen::MatrixXd& at(int i) { return slices_.at(static_cast<size_t>(i)); }

    [[nodiscard]] Field slice(int i) const { return Field(sgrid_, at(i)); }
    void set_slice(int i, const Field& f) {
        require(f.grid() == sgrid_ && f.k() == k_, ErrorCode::ShapeMismatch, "slice shape mismatch");
        at(i) = f.values();
    }

    [[nodiscard]] bool all_finite() const {
        for (const auto& s : slices_) {
            if (!s.allFinite()) {
                return false;
            }
        }
        return true;
    }

    CylinderField& operator+=(const CylinderField& o) {
        check_shape(o);
        for (size_t i = 0; i < slices_.size(); ++i) slices_[i] += o.slices_[i];
        return *this;
    }
    CylinderField& operator*=(double s) {
        for (auto& m : slices_) m *= s;
        return *this;
    }
    friend CylinderField operator+(CylinderField l, const CylinderField& r) { return l += r; }
    friend CylinderField operator*(double s, CylinderField f) { return f *= s; }

    void check_shape(const CylinderField& o) const {
        require(sgrid_ == o.sgrid_ && cgrid_ == o.cgrid_ && k_ == o.k_, ErrorCode::ShapeMismatch,
                "cylinder fields live on different grids");
    }

private:
    SpatialGrid sgrid_;
    CylinderGrid cgrid_;
    int k_ = 1;
    std::vector<Eigen::MatrixXd> slices_;
};

/// Time-stamped sequence of spatial profiles (a sampled orbit).
struct Trajectory {
    std::vector<double> times;
    std::vector<Field> states;

    [[nodiscard]] size_t size() const noexcept { return states.size(); }
    [[nodiscard]] bool empty() const noexcept { return states.empty(); }
    [[nodiscard]] const Field& back() const { return states.back(); }
    void push(double t, Field f) {
        times.push_back(t);
        states.push_back(std::move(f));
    }
};

} // namespace ellab
