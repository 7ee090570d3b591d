#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ellab/elliptic.hpp"

using namespace ellab;
using std::numbers::pi;

namespace {

NewtonOptions tight(double tol = 1e-12) {
    NewtonOptions o;
    o.tol_residual = tol;
    o.max_iters = 60;
    return o;
}

ProcessContext context(double lambda, int n, double eps) {
    ProcessContext ctx;
    ctx.mats = CouplingMatrices::identity(1);
    ctx.nl = chafee_infante(lambda);
    ctx.grid = SpatialGrid(pi, n);
    ctx.g = Forcing::zero(ctx.grid);
    ctx.eps = eps;
    ctx.newton = tight();
    return ctx;
}

// Amplitudes c_0..c_M of the separable solution c_i sin(jx) of the discrete
// linear problem, obtained from the scalar recurrence by a dense solve.
Eigen::VectorXd modal_amplitudes(double lam, double eps, double dt, int m, double gamma) {
    const double c2 = eps * eps / (dt * dt);
    const double cd = gamma / (2.0 * dt);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 1; i < m; ++i) {
        const int r = i - 1;
        a(r, r) = -2.0 * c2 - lam;
        if (i + 1 <= m) a(r, i) = c2 - cd;
        if (i - 1 >= 1) a(r, i - 2) = c2 + cd;
        else rhs(r) = -(c2 + cd);  // c_0 = 1
    }
    a(m - 1, m - 1) = 1.0;  // c_M - c_{M-1} = 0
    a(m - 1, m - 2) = -1.0;
    Eigen::VectorXd c(m + 1);
    c(0) = 1.0;
    c.tail(m) = a.fullPivLu().solve(rhs);
    return c;
}

} // namespace

TEST(SpaceTime, SeparableModeMatchesScalarRecurrence) {
    const SpatialGrid g(pi, 24);
    const int j = 2, m = 80;
    const double eps = 0.3, gamma = 1.5, c = 0.4;
    const CylinderGrid cg(0.0, 3.0, m, eps);
    const auto mats = CouplingMatrices::scalar(1.0, gamma);
    const Field u0 = Field::sine_mode(g, j);
    const CylinderField u = solve_truncated_bvp(g, cg, mats, linear_nonlinearity(c), *Forcing::zero(g), u0,
                                                FarBoundary::zero_time_derivative(), tight(1e-13));
    const double h = g.h();
    const double lam = (2.0 - 2.0 * std::cos(j * h)) / (h * h) + c;
    const Eigen::VectorXd amp = modal_amplitudes(lam, eps, cg.dt(), m, gamma);
    double worst = 0.0;
    for (int i = 0; i <= m; ++i) worst = std::max(worst, (u.at(i) - amp(i) * u0.values()).cwiseAbs().maxCoeff());
    EXPECT_LE(worst, 1e-11);
}

TEST(SpaceTime, ContinuumDecayRateIsRecovered) {
    // eps^2 mu^2 - gamma mu - lambda = 0, decaying root
    const SpatialGrid g(pi, 63);
    const double eps = 0.1, lam = 1.0;
    const CylinderGrid cg(0.0, 4.0, 800, eps);
    const CylinderField u =
        solve_truncated_bvp(g, cg, CouplingMatrices::identity(1), zero_nonlinearity(), *Forcing::zero(g),
                            Field::sine_mode(g, 1), FarBoundary::zero_time_derivative(), tight(1e-10));
    const double mu = (1.0 - std::sqrt(1.0 + 4.0 * eps * eps * lam)) / (2.0 * eps * eps);
    const int i1 = cg.index_of(1.0);
    const double got = u.at(i1)(31, 0) / std::sin(g.node(31));
    EXPECT_NEAR(got, std::exp(mu), 1e-3 * std::exp(mu));
}

TEST(SpaceTime, ZeroDataGivesZeroSolution) {
    const SpatialGrid g(pi, 16);
    const CylinderGrid cg(0.0, 2.0, 40, 0.2);
    NewtonTrace trace;
    const CylinderField u = solve_truncated_bvp(g, cg, CouplingMatrices::identity(1), chafee_infante(2.0),
                                                *Forcing::zero(g), Field::zero(g), {}, tight(), nullptr, &trace);
    EXPECT_EQ(trace.iterations, 0);
    for (int i = 0; i <= 40; ++i) EXPECT_EQ(u.at(i).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SpaceTime, ResidualVanishesAtTheSolution) {
    const SpatialGrid g(pi, 20);
    const CylinderGrid cg(0.0, 2.0, 60, 0.25);
    const auto forcing = Forcing::periodic(Field::sine_mode(g, 1, 0.2), Field::sine_mode(g, 2, 0.3), 3.0);
    const Field u0 = Field::sine_mode(g, 1, 1.2);
    SpaceTimeSolver solver(g, cg, CouplingMatrices::identity(1), chafee_infante(1.0), forcing.get(), {});
    const CylinderField u = solver.newton(u0, solver.constant_extension(u0), tight());
    EXPECT_LE(solver.residual(u).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(u.at(0), u0.values());
}

TEST(SpaceTime, ZeroEpsDelegatesToImplicitStepping) {
    const SpatialGrid g(pi, 20);
    const CylinderGrid cg(0.0, 1.0, 50, 0.0);
    const auto forcing = Forcing::constant(Field::sine_mode(g, 1, 0.5));
    const Field u0 = Field::sine_mode(g, 1) + Field::sine_mode(g, 3, 0.3);
    const CylinderField u = solve_truncated_bvp(g, cg, CouplingMatrices::identity(1), chafee_infante(1.0), *forcing,
                                                u0, {}, tight());
    StepOptions so;
    so.dt = 1.0 / 50;
    so.newton = tight();
    const Trajectory t = semigroup_evolve(u0, 1.0, so, CouplingMatrices::identity(1), chafee_infante(1.0), *forcing);
    ASSERT_EQ(t.size(), 51u);
    for (int i = 0; i <= 50; ++i) EXPECT_LE((u.at(i) - t.states[i].values()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(SpaceTime, SolveRequiresConsistentShapes) {
    const SpatialGrid g(pi, 16);
    const CylinderGrid cg(0.0, 1.0, 10, 0.2);
    try {
        (void)solve_truncated_bvp(g, cg, CouplingMatrices::identity(1), chafee_infante(1.0), *Forcing::zero(g),
                                  Field::zero(SpatialGrid(pi, 15)), {}, tight());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
}

TEST(Process, MapAtInitialTimeIsIdentity) {
    const ProcessContext ctx = context(1.0, 16, 0.1);
    const Field u = Field::sine_mode(ctx.grid, 1, 0.7);
    EXPECT_EQ(process_map(u, 0.5, 0.5, ctx).values(), u.values());
    EXPECT_EQ(discrete_cascade(3, 3, u, ctx).values(), u.values());
}

TEST(Process, CascadeComposesUnitMaps) {
    const ProcessContext ctx = context(1.0, 16, 0.1);
    const Field u = Field::sine_mode(ctx.grid, 1, 0.7);
    const Field two = discrete_cascade(2, 0, u, ctx);
    const Field manual = process_map(process_map(u, 0, 1, ctx), 1, 2, ctx);
    EXPECT_LE(l2_dist(two, manual), 1e-14);
}

TEST(Process, FarTruncationIsInvisibleAtTheReportedSlice) {
    ProcessContext ctx = context(1.0, 24, 0.2);
    const Field u = Field::sine_mode(ctx.grid, 1) + Field::sine_mode(ctx.grid, 2, 0.5);
    const Field short_margin = process_map(u, 0, 1, ctx);
    ctx.margin = 4.0;
    const Field long_margin = process_map(u, 0, 1, ctx);
    EXPECT_LE(l2_dist(short_margin, long_margin), 1e-9);
}

TEST(Process, TrajectorySamplesEveryStride) {
    const ProcessContext ctx = context(1.0, 16, 0.1);
    const Trajectory t = process_trajectory(Field::sine_mode(ctx.grid, 1), 0.0, 1.0, 0.25, ctx);
    ASSERT_EQ(t.size(), 5u);
    for (size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(t.times[i], 0.25 * i, 1e-12);
}

TEST(Variations, FirstOrderDifferenceQuotient) {
    const SpatialGrid g(pi, 32);
    const CylinderGrid cg(0.0, 3.0, 120, 0.2);
    const auto mats = CouplingMatrices::identity(1);
    const Nonlinearity nl = chafee_infante(1.0);
    const ForcingPtr zero_ptr = Forcing::zero(g);
    const Forcing& zero = *zero_ptr;
    const Field u0 = Field::sine_mode(g, 1, 1.5);
    const Field xi = Field::sine_mode(g, 1) + Field::sine_mode(g, 2, 0.5);
    const CylinderField base = solve_truncated_bvp(g, cg, mats, nl, zero, u0, {}, tight());
    const CylinderField v = variational_process(base, xi, mats, nl);
    auto error_at = [&](double delta) {
        const CylinderField p = solve_truncated_bvp(g, cg, mats, nl, zero, u0 + delta * xi, {}, tight());
        double worst = 0.0;
        for (int i = 0; i <= 80; ++i) worst = std::max(worst, ((p.at(i) - base.at(i)) / delta - v.at(i)).cwiseAbs().maxCoeff());
        return worst;
    };
    const double e1 = error_at(1e-2), e2 = error_at(1e-3);
    EXPECT_LE(e2, 0.2 * e1);
    EXPECT_LE(e2, 1e-2);
    const CylinderField z = variational_process(base, Field::zero(g), mats, nl);
    for (int i = 0; i <= 120; ++i) EXPECT_EQ(z.at(i).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Regularity, BothDataVanishingIsDegenerate) {
    const ProcessContext ctx = context(0.0, 16, 0.1);
    try {
        (void)regularity_probe({0.1}, *Forcing::zero(ctx.grid), Field::zero(ctx.grid), ctx);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateData);
    }
}

TEST(Regularity, RatiosStayBoundedAsEpsShrinks) {
    ProcessContext ctx = context(0.0, 32, 0.0);
    const auto h = Forcing::constant(Field::sine_mode(ctx.grid, 1));
    const RegularityTable tab = regularity_probe({0.2, 0.1, 0.05, 0.0}, *h, Field::sine_mode(ctx.grid, 2), ctx);
    ASSERT_EQ(tab.rows.size(), 4u);
    for (const auto& r : tab.rows) EXPECT_GT(r.ratio, 0.0);
    EXPECT_LE(tab.spread, 2.0);
}

TEST(Uniqueness, LinearProblemHasOneSolutionFromEveryGuess) {
    ProcessContext ctx = context(0.0, 24, 0.0);
    ctx.nl = linear_nonlinearity(0.5);
    const UniquenessRecord rec = uniqueness_probe({0.3, 0.1, 0.0}, Field::sine_mode(ctx.grid, 1), 1.0, ctx, 4, 1e-8, 3);
    ASSERT_EQ(rec.rows.size(), 2u);  // eps = 0 is an initial-value problem and is skipped
    for (const auto& r : rec.rows) {
        EXPECT_EQ(r.converged, 4);
        EXPECT_TRUE(r.agree) << r.eps << " spread " << r.spread;
    }
    ASSERT_TRUE(rec.largest_agreeing_eps.has_value());
    EXPECT_EQ(*rec.largest_agreeing_eps, 0.3);
}

TEST(Uniqueness, GuessesStartFromTheData) {
    const SpatialGrid g(pi, 12);
    const CylinderGrid cg(0.0, 2.0, 20, 0.2);
    const Field u0 = Field::sine_mode(g, 1, 0.7);
    const auto guesses = uniqueness_guesses(u0, cg, 4, 9);
    ASSERT_EQ(guesses.size(), 4u);
    for (const auto& gs : guesses) EXPECT_LE((gs.at(0) - u0.values()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GT((guesses[2].at(20) - guesses[3].at(20)).cwiseAbs().maxCoeff(), 0.0);
}
