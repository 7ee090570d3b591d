#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ellab/equilibria.hpp"
#include "ellab/parabolic.hpp"

using namespace ellab;
using std::numbers::pi;

namespace {

StepOptions step(double dt) {
    StepOptions so;
    so.dt = dt;
    so.newton.tol_residual = 1e-12;
    return so;
}

// z'' = z^3 - lambda z, z(0) = 0, z'(0) = s, integrated by RK4 up to x_end.
double shoot(double s, double lambda, double x_end, int steps = 4000) {
    double z = 0.0, p = s;
    const double h = x_end / steps;
    auto acc = [lambda](double v) { return v * v * v - lambda * v; };
    for (int i = 0; i < steps; ++i) {
        const double k1z = p, k1p = acc(z);
        const double k2z = p + 0.5 * h * k1p, k2p = acc(z + 0.5 * h * k1z);
        const double k3z = p + 0.5 * h * k2p, k3p = acc(z + 0.5 * h * k2z);
        const double k4z = p + h * k3p, k4p = acc(z + h * k3z);
        z += h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
    }
    return z;
}

// Value at pi/2 of the positive one-hump steady state, 1 < lambda < 4. The
// half-period grows with the slope from pi/sqrt(lambda) to infinity at the
// separatrix slope lambda/sqrt(2), so z(pi) changes sign once in between.
double positive_steady_peak(double lambda) {
    double lo = 1e-3, hi = lambda / std::numbers::sqrt2;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (shoot(mid, lambda, pi) > 0.0 ? hi : lo) = mid;
    }
    return shoot(0.5 * (lo + hi), lambda, pi / 2);
}

} // namespace

TEST(ImplicitStep, LinearModeDecaysByExactFactor) {
    const SpatialGrid g(pi, 40);
    const auto mats = CouplingMatrices::scalar(1.5, 2.0);
    const double c = 0.3, dt = 0.05;
    const int j = 3;
    const double h = g.h();
    const double lam = (2.0 - 2.0 * std::cos(j * h)) / (h * h);
    const Field u = Field::sine_mode(g, j);
    const Field v = implicit_step(u, 0.0, step(dt), mats, linear_nonlinearity(c), *Forcing::zero(g));
    const double factor = 1.0 / (1.0 + dt * (1.5 * lam + c) / 2.0);
    EXPECT_LE((v.values() - factor * u.values()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ImplicitStep, ForcingIsEvaluatedAtTheNewTime) {
    // u = 0, f = 0: gamma v/dt = a Delta v - g(dt), with g = sin(pi t / (2 dt)) phi
    const SpatialGrid g(pi, 30);
    const double dt = 0.1;
    const Field phi = Field::sine_mode(g, 1);
    const auto forcing = Forcing::periodic(Field::zero(g), phi, pi / (2.0 * dt));
    const Field v = implicit_step(Field::zero(g), 0.0, step(dt), CouplingMatrices::identity(1), zero_nonlinearity(),
                                  *forcing);
    const double h = g.h();
    const double lam = (2.0 - 2.0 * std::cos(h)) / (h * h);
    EXPECT_LE((v.values() + phi.values() / (1.0 / dt + lam)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ImplicitStep, EquilibriumIsAFixedPoint) {
    const SpatialGrid g(pi, 48);
    const auto mats = CouplingMatrices::identity(1);
    const Nonlinearity nl = chafee_infante(2.0);
    const auto eqs = find_equilibria(mats, nl, Field::zero(g));
    ASSERT_EQ(eqs.size(), 3u);
    for (const auto& e : eqs) {
        const Field v = implicit_step(e.z, 0.0, step(0.1), mats, nl, *Forcing::zero(g));
        EXPECT_LE(l2_dist(v, e.z), 1e-10);
    }
}

TEST(Semigroup, ZeroHorizonReturnsTheStart) {
    const SpatialGrid g(pi, 16);
    const Field u0 = Field::sine_mode(g, 1);
    const Trajectory t = semigroup_evolve(u0, 0.0, step(0.1), CouplingMatrices::identity(1), chafee_infante(1.0),
                                          *Forcing::zero(g));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.back().values(), u0.values());
}

TEST(Semigroup, HitsTheHorizonExactlyAndRecordsStrides) {
    const SpatialGrid g(pi, 16);
    const Trajectory t = semigroup_evolve(Field::sine_mode(g, 1), 1.0, step(0.3), CouplingMatrices::identity(1),
                                          chafee_infante(1.0), *Forcing::zero(g), 2.0, 2);
    EXPECT_DOUBLE_EQ(t.times.front(), 2.0);
    EXPECT_NEAR(t.times.back(), 3.0, 1e-14);
    EXPECT_EQ(t.size(), 3u);  // start, step 2, step 4 (= last)
}

TEST(Semigroup, BackwardEulerIsFirstOrder) {
    const SpatialGrid g(pi, 32);
    const auto mats = CouplingMatrices::identity(1);
    const Nonlinearity nl = chafee_infante(2.0);
    const auto forcing = Forcing::periodic(Field::zero(g), Field::sine_mode(g, 2, 0.5), 2.0);
    const Field u0 = Field::sine_mode(g, 1, 0.5);
    auto end = [&](double dt) { return semigroup_evolve(u0, 1.0, step(dt), mats, nl, *forcing).back(); };
    const Field ref = end(1.0 / 1280);
    const double e1 = l2_dist(end(0.02), ref), e2 = l2_dist(end(0.01), ref);
    EXPECT_NEAR(e1 / e2, 2.0, 0.25);
}

TEST(Semigroup, ConvergesToThePositiveSteadyState) {
    const SpatialGrid g(pi, 127);
    const double lambda = 2.0;
    const Field bump = Field::sine_mode(g, 1, 0.1);
    const Trajectory t = semigroup_evolve(bump, 40.0, step(0.05), CouplingMatrices::identity(1),
                                          chafee_infante(lambda), *Forcing::zero(g), 0.0, 800);
    const double peak = positive_steady_peak(lambda);
    EXPECT_GT(peak, 0.5);
    EXPECT_NEAR(t.back()(63), peak, 1e-3);
    for (int j = 0; j < g.n_interior(); ++j) EXPECT_GT(t.back()(j), 0.0);
}

TEST(Lyapunov, ClosedFormValues) {
    const SpatialGrid g(pi, 50);
    const auto mats = CouplingMatrices::identity(1);
    const Field zero = Field::zero(g);
    EXPECT_EQ(lyapunov_value(zero, mats, chafee_infante(2.0), zero), 0.0);
    // cell differences of sin x: h sum cos^2 at midpoints is pi/2 exactly on this grid
    const double h = g.h();
    const double grad = 4.0 * std::sin(h / 2) * std::sin(h / 2) / (h * h) * pi / 2;
    const Field s = Field::sine_mode(g, 1);
    EXPECT_NEAR(lyapunov_value(s, mats, zero_nonlinearity(), zero), grad, 1e-13);
    EXPECT_NEAR(lyapunov_value(s, mats, linear_nonlinearity(2.0), zero), grad + pi, 1e-13);
    EXPECT_NEAR(lyapunov_value(s, mats, zero_nonlinearity(), Field::sine_mode(g, 1, 0.5)), grad + pi / 2, 1e-13);
}

TEST(Lyapunov, DecreasesAlongTheLimitFlow) {
    const SpatialGrid g(pi, 64);
    const auto mats = CouplingMatrices::identity(1);
    const Nonlinearity nl = chafee_infante(2.0);
    const Field gbar = Field::sine_mode(g, 2, 0.3);
    const Field u0 = Field::sine_mode(g, 1, 2.0) + Field::sine_mode(g, 3, -1.0);
    const Trajectory t = semigroup_evolve(u0, 3.0, step(0.01), mats, nl, *Forcing::constant(gbar));
    double prev = lyapunov_value(t.states.front(), mats, nl, gbar);
    for (size_t i = 1; i < t.size(); ++i) {
        const double cur = lyapunov_value(t.states[i], mats, nl, gbar);
        EXPECT_LE(cur, prev + 1e-12) << "step " << i;
        prev = cur;
    }
}

TEST(Lyapunov, RequiresPotentialAndSymmetricDiffusion) {
    const SpatialGrid g(pi, 8);
    Nonlinearity nl = chafee_infante(1.0);
    nl.potential_F.reset();
    try {
        (void)lyapunov_value(Field::zero(g), CouplingMatrices::identity(1), nl, Field::zero(g));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingPotential);
    }
    Eigen::MatrixXd a(2, 2);
    a << 1, 0.5, -0.5, 1;
    try {
        (void)lyapunov_value(Field::zero(g, 2), CouplingMatrices(a, Eigen::MatrixXd::Identity(2, 2)),
                             coupled_cubic_pair(1.0, 0.1), Field::zero(g, 2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AsymmetricA);
    }
}

TEST(Variations, LinearizedFlowMatchesDifferenceQuotient) {
    const SpatialGrid g(pi, 32);
    const auto mats = CouplingMatrices::identity(1);
    const Nonlinearity nl = chafee_infante(2.0);
    const ForcingPtr zero = Forcing::zero(g);
    const Field u0 = Field::sine_mode(g, 1, 0.8);
    const Field xi = Field::sine_mode(g, 2);
    const Trajectory base = semigroup_evolve(u0, 1.0, step(0.02), mats, nl, *zero);
    const Trajectory w = variational_evolve(base, xi, mats, nl);
    const double d = 1e-6;
    const Trajectory p = semigroup_evolve(u0 + d * xi, 1.0, step(0.02), mats, nl, *zero);
    EXPECT_LE(l2_dist((1.0 / d) * (p.back() - base.back()), w.back()), 1e-4);
}
