#include <random>

#include <gtest/gtest.h>

#include "ellab/linalg.hpp"

using namespace ellab;

namespace {

Eigen::MatrixXd random_banded(int n, int kl, int ku, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) a(i, j) = u(rng);
    return a;
}

} // namespace

TEST(BandedLU, MatchesDenseSolve) {
    std::mt19937_64 rng(7);
    for (auto [kl, ku] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{4, 1}}) {
        const int n = 40;
        const Eigen::MatrixXd a = random_banded(n, kl, ku, rng);
        BandedLU lu(n, kl, ku);
        for (int i = 0; i < n; ++i)
            for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) lu.add(i, j, a(i, j));
        lu.factor();
        Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
        const Eigen::VectorXd want = a.fullPivLu().solve(b);
        lu.solve_in_place(b);
        EXPECT_LE((b - want).cwiseAbs().maxCoeff(), 1e-9 * (1.0 + want.cwiseAbs().maxCoeff())) << kl << "," << ku;
    }
}

TEST(BandedLU, PivotsPastZeroDiagonal) {
    BandedLU lu(2, 1, 1);
    lu.add(0, 1, 1.0);
    lu.add(1, 0, 1.0);
    lu.factor();
    Eigen::VectorXd b(2);
    b << 3.0, 5.0;
    lu.solve_in_place(b);
    EXPECT_DOUBLE_EQ(b(0), 5.0);
    EXPECT_DOUBLE_EQ(b(1), 3.0);
}

TEST(BandedLU, SingularMatrixIsReported) {
    BandedLU lu(3, 1, 1);
    lu.add(0, 0, 1.0);
    lu.add(1, 0, 1.0);
    try {
        lu.factor();
        FAIL() << "expected SingularJacobian";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularJacobian);
    }
}

class BlockTridiagonal : public ::testing::TestWithParam<int> {};

TEST_P(BlockTridiagonal, MatchesDenseAssembly) {
    const int k = GetParam();
    const int n = 6, m = 7, nk = n * k;
    std::mt19937_64 rng(11 + k);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Eigen::MatrixXd> diag, lower, upper;
    for (int i = 0; i < m; ++i) {
        Eigen::MatrixXd d = Eigen::MatrixXd::NullaryExpr(nk, nk, [&] { return u(rng); });
        d.diagonal().array() += 3.0 * nk;
        diag.push_back(d);
        lower.push_back(Eigen::MatrixXd::NullaryExpr(k, k, [&] { return u(rng); }));
        upper.push_back(Eigen::MatrixXd::NullaryExpr(k, k, [&] { return u(rng); }));
    }
    // slice blocks are n x k column-major, so X L^T acts as kron(L, I_n) on vec(X)
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    auto kron = [&](const Eigen::MatrixXd& l) {
        Eigen::MatrixXd out(nk, nk);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) out.block(r * n, c * n, n, n) = l(r, c) * id;
        return out;
    };
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(m * nk, m * nk);
    for (int i = 0; i < m; ++i) {
        dense.block(i * nk, i * nk, nk, nk) = diag[i];
        if (i > 0) dense.block(i * nk, (i - 1) * nk, nk, nk) = kron(lower[i]);
        if (i + 1 < m) dense.block(i * nk, (i + 1) * nk, nk, nk) = kron(upper[i]);
    }
    const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(m * nk, [&] { return u(rng); });
    const Eigen::VectorXd want = dense.partialPivLu().solve(b);

    SpaceTimeFactorization f;
    f.factor(diag, lower, upper, n, k);
    std::vector<Eigen::MatrixXd> rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = Eigen::Map<const Eigen::MatrixXd>(b.data() + i * nk, n, k);
    f.solve(rhs);
    for (int i = 0; i < m; ++i) {
        const Eigen::Map<const Eigen::VectorXd> got(rhs[i].data(), nk);
        EXPECT_LE((got - want.segment(i * nk, nk)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

INSTANTIATE_TEST_SUITE_P(Components, BlockTridiagonal, ::testing::Values(1, 2, 3));

TEST(SpaceTimeFactorization, SingularBlockIsReported) {
    SpaceTimeFactorization f;
    std::vector<Eigen::MatrixXd> diag{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
    std::vector<Eigen::MatrixXd> lower{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1)};
    std::vector<Eigen::MatrixXd> upper{Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1)};
    try {
        f.factor(diag, lower, upper, 2, 1);  // second Schur block is I - I = 0
        FAIL() << "expected SingularJacobian";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularJacobian);
    }
}
