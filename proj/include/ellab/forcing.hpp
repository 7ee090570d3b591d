#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <variant>

#include "ellab/error.hpp"
#include "ellab/field.hpp"

namespace ellab {

struct Forcing;
using ForcingPtr = std::shared_ptr<const Forcing>;

struct ConstantForcing {
    Field mean;
};

/// g_minus + (1 + tanh(t/scale))/2 (g_plus - g_minus): limits g_minus at -inf and g_plus at +inf.
struct HeteroclinicForcing {
    Field g_minus;
    Field g_plus;
    double scale = 1.0;
};

/// mean + sin(omega t) osc
struct PeriodicForcing {
    Field mean;
    Field osc;
    double omega = 1.0;
};

/// mean + sin(omega1 t) osc1 + sin(omega2 t) osc2
struct QuasiperiodicForcing {
    Field mean;
    Field osc1;
    double omega1 = 1.0;
    Field osc2;
    double omega2 = std::numbers::sqrt2;
};

/// g1 on [4k^2, (2k+1)^2), g2 on [(2k-1)^2, 4k^2).
struct PatchworkForcing {
    ForcingPtr g1;
    ForcingPtr g2;
};

/// inner(t / eps)
struct FastScaledForcing {
    ForcingPtr inner;
    double eps = 1.0;
};

/// External force g(t, x) as a closed family of concrete profiles.
struct Forcing {
    using Variant = std::variant<ConstantForcing, HeteroclinicForcing, PeriodicForcing, QuasiperiodicForcing,
                                 PatchworkForcing, FastScaledForcing>;
    Variant v;

    static ForcingPtr constant(Field mean) { return std::make_shared<const Forcing>(Forcing{ConstantForcing{std::move(mean)}}); }
    static ForcingPtr zero(SpatialGrid grid, int k = 1) { return constant(Field::zero(grid, k)); }
    static ForcingPtr heteroclinic(Field g_minus, Field g_plus, double scale) {
        g_minus.check_shape(g_plus);
        require(scale > 0.0, ErrorCode::InvalidArgument, "heteroclinic scale must be positive");
        return std::make_shared<const Forcing>(Forcing{HeteroclinicForcing{std::move(g_minus), std::move(g_plus), scale}});
    }
    static ForcingPtr periodic(Field mean, Field osc, double omega) {
        mean.check_shape(osc);
        require(omega > 0.0, ErrorCode::InvalidArgument, "omega must be positive");
        return std::make_shared<const Forcing>(Forcing{PeriodicForcing{std::move(mean), std::move(osc), omega}});
    }
    static ForcingPtr quasiperiodic(Field mean, Field osc1, double omega1, Field osc2, double omega2) {
        mean.check_shape(osc1);
        mean.check_shape(osc2);
        require(omega1 > 0.0 && omega2 > 0.0, ErrorCode::InvalidArgument, "frequencies must be positive");
        return std::make_shared<const Forcing>(
            Forcing{QuasiperiodicForcing{std::move(mean), std::move(osc1), omega1, std::move(osc2), omega2}});
    }
    static ForcingPtr patchwork(ForcingPtr g1, ForcingPtr g2) {
        require(g1 && g2, ErrorCode::InvalidArgument, "patchwork needs two forcings");
        return std::make_shared<const Forcing>(Forcing{PatchworkForcing{std::move(g1), std::move(g2)}});
    }
    static ForcingPtr fast_scaled(ForcingPtr inner, double eps) {
        require(inner != nullptr, ErrorCode::InvalidArgument, "fast_scaled needs an inner forcing");
        require(eps > 0.0, ErrorCode::InvalidArgument, "fast_scaled eps must be positive");
        return std::make_shared<const Forcing>(Forcing{FastScaledForcing{std::move(inner), eps}});
    }

    /// A representative profile (fixes grid and component count).
    [[nodiscard]] const Field& profile() const {
        return std::visit(
            [](const auto& g) -> const Field& {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, ConstantForcing>) return g.mean;
                else if constexpr (std::is_same_v<T, HeteroclinicForcing>) return g.g_minus;
                else if constexpr (std::is_same_v<T, PeriodicForcing>) return g.mean;
                else if constexpr (std::is_same_v<T, QuasiperiodicForcing>) return g.mean;
                else if constexpr (std::is_same_v<T, PatchworkForcing>) return g.g1->profile();
                else return g.inner->profile();
            },
            v);
    }
    [[nodiscard]] const SpatialGrid& grid() const { return profile().grid(); }
    [[nodiscard]] int k() const { return profile().k(); }

    [[nodiscard]] bool is_constant() const { return std::holds_alternative<ConstantForcing>(v); }
};

/// True if the patchwork switch selects g1 at time t.
/// For t >= 0 with n = floor(sqrt(t)): n even <=> t in [4k^2, (2k+1)^2).
/// The branches cover only t >= 0, so negative times use |t|.
inline bool patchwork_selects_first(double t) {
    const double s = std::abs(t);
    auto n = static_cast<long long>(std::floor(std::sqrt(s)));
    while (static_cast<double>(n + 1) * static_cast<double>(n + 1) <= s) ++n;
    while (n > 0 && static_cast<double>(n) * static_cast<double>(n) > s) --n;
    return n % 2 == 0;
}

/// Writes g(t) into out (n x k), avoiding allocations in hot loops.
inline void eval_forcing_into(const Forcing& g, double t, Eigen::MatrixXd& out) {
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantForcing>) {
                out = f.mean.values();
            } else if constexpr (std::is_same_v<T, HeteroclinicForcing>) {
                const double w = 0.5 * (1.0 + std::tanh(t / f.scale));
                out = f.g_minus.values() + w * (f.g_plus.values() - f.g_minus.values());
            } else if constexpr (std::is_same_v<T, PeriodicForcing>) {
                out = f.mean.values() + std::sin(f.omega * t) * f.osc.values();
            } else if constexpr (std::is_same_v<T, QuasiperiodicForcing>) {
                out = f.mean.values() + std::sin(f.omega1 * t) * f.osc1.values() +
                      std::sin(f.omega2 * t) * f.osc2.values();
            } else if constexpr (std::is_same_v<T, PatchworkForcing>) {
                eval_forcing_into(patchwork_selects_first(t) ? *f.g1 : *f.g2, t, out);
            } else {
                eval_forcing_into(*f.inner, t / f.eps, out);
            }
        },
        g.v);
}

inline Field eval_forcing(const Forcing& g, double t) {
    require(std::isfinite(t), ErrorCode::InvalidArgument, "forcing evaluated at non-finite time");
    Eigen::MatrixXd out;
    eval_forcing_into(g, t, out);
    return Field(g.grid(), std::move(out));
}

/// Shortest intrinsic time scale of the forcing (infinity when constant in time).
inline double forcing_time_scale(const Forcing& g) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ConstantForcing>) return inf;
            else if constexpr (std::is_same_v<T, HeteroclinicForcing>) return f.scale;
            else if constexpr (std::is_same_v<T, PeriodicForcing>) return 2.0 * std::numbers::pi / f.omega;
            else if constexpr (std::is_same_v<T, QuasiperiodicForcing>)
                return 2.0 * std::numbers::pi / std::max(f.omega1, f.omega2);
            else if constexpr (std::is_same_v<T, PatchworkForcing>)
                return std::min({1.0, forcing_time_scale(*f.g1), forcing_time_scale(*f.g2)});
            else return f.eps * forcing_time_scale(*f.inner);
        },
        g.v);
}

/// Exact period when the forcing is time-periodic (Periodic or fast-scaled Periodic), else 0.
inline double forcing_period(const Forcing& g) {
    if (const auto* p = std::get_if<PeriodicForcing>(&g.v)) return 2.0 * std::numbers::pi / p->omega;
    if (const auto* s = std::get_if<FastScaledForcing>(&g.v)) return s->eps * forcing_period(*s->inner);
    return 0.0;
}

/// (1/window) int_{t0}^{t0+window} g(s) ds by composite Simpson quadrature.
/// `panels` = 0 picks 64 panels per intrinsic time scale (at least 256).
inline Field time_average(const Forcing& g, double t0, double window, long panels = 0) {
    require(window > 0.0 && std::isfinite(window), ErrorCode::InvalidArgument, "window must be positive");
    if (g.is_constant()) return std::get<ConstantForcing>(g.v).mean;
    if (panels <= 0) {
        const double ts = forcing_time_scale(g);
        const double want = std::isfinite(ts) ? 64.0 * window / ts : 256.0;
        panels = static_cast<long>(std::clamp(std::ceil(want), 256.0, 5e7));
    }
    if (panels % 2 != 0) ++panels;
    const double hq = window / static_cast<double>(panels);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(g.grid().n_interior(), g.k());
    Eigen::MatrixXd tmp;
    for (long i = 0; i <= panels; ++i) {
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        eval_forcing_into(g, t0 + static_cast<double>(i) * hq, tmp);
        acc += w * tmp;
    }
    acc *= hq / (3.0 * window);
    return Field(g.grid(), std::move(acc));
}

} // namespace ellab
