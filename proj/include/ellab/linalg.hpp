#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ellab/error.hpp"

namespace ellab {

/// General band matrix with kl sub- and ku super-diagonals, LU-factorized in
/// place with partial pivoting (LAPACK gbtf2 layout: row kl+ku+i-j of column j).
class BandedLU {
public:
    BandedLU(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ab_(Eigen::MatrixXd::Zero(2 * kl + ku + 1, n)), ipiv_(static_cast<size_t>(n)) {}

    [[nodiscard]] int n() const noexcept { return n_; }

    /// Adds v to entry (i, j); |i - j| must lie inside the original band.
    void add(int i, int j, double v) { ab_(kl_ + ku_ + i - j, j) += v; }

    void factor() {
        int ju = 0;
        for (int j = 0; j < n_; ++j) {
            const int km = std::min(kl_, n_ - 1 - j);
            int p = 0;
            double best = std::abs(at(j, j));
            for (int i = 1; i <= km; ++i) {
                if (std::abs(at(j + i, j)) > best) {
                    best = std::abs(at(j + i, j));
                    p = i;
                }
            }
            ipiv_[static_cast<size_t>(j)] = j + p;
            if (!(best > 0.0) || !std::isfinite(best)) {
                fail(ErrorCode::SingularJacobian, "zero pivot in banded factorization");
            }
            ju = std::max(ju, std::min(j + ku_ + p, n_ - 1));
            if (p != 0) {
                for (int c = j; c <= ju; ++c) std::swap(at(j, c), at(j + p, c));
            }
            const double piv = at(j, j);
            for (int i = 1; i <= km; ++i) at(j + i, j) /= piv;
            for (int c = j + 1; c <= ju; ++c) {
                const double ujc = at(j, c);
                if (ujc == 0.0) continue;
                for (int i = 1; i <= km; ++i) at(j + i, c) -= at(j + i, j) * ujc;
            }
        }
    }

    void solve_in_place(Eigen::Ref<Eigen::VectorXd> b) const {
        for (int j = 0; j < n_; ++j) {
            const int p = ipiv_[static_cast<size_t>(j)];
            if (p != j) std::swap(b(j), b(p));
            const int km = std::min(kl_, n_ - 1 - j);
            for (int i = 1; i <= km; ++i) b(j + i) -= at(j + i, j) * b(j);
        }
        const int bw = kl_ + ku_;
        for (int j = n_ - 1; j >= 0; --j) {
            b(j) /= at(j, j);
            for (int i = std::max(0, j - bw); i < j; ++i) b(i) -= at(i, j) * b(j);
        }
    }

private:
    [[nodiscard]] double& at(int i, int j) { return ab_(kl_ + ku_ + i - j, j); }
    [[nodiscard]] double at(int i, int j) const { return ab_(kl_ + ku_ + i - j, j); }

    int n_, kl_, ku_;
    Eigen::MatrixXd ab_;
    std::vector<int> ipiv_;
};

/// Block-tridiagonal system in the axial index with dense (n k) x (n k)
/// diagonal blocks and off-diagonal blocks of the Kronecker form c (x) I_n,
/// where c is a small k x k coefficient matrix. Slices are n x k blocks in
/// component-major order, so (c (x) I_n) y == Y c^T.
///
/// Factorization is block Gaussian elimination without inter-block pivoting;
/// each Schur complement is inverted with partial pivoting. Storage is one
/// dense inverse per slice.
class SpaceTimeFactorization {
public:
    SpaceTimeFactorization() = default;

    /// diag[i], lower[i] (couples slice i to i-1, ignored for i = 0),
    /// upper[i] (couples slice i to i+1, ignored for the last slice).
    void factor(std::vector<Eigen::MatrixXd> diag, std::vector<Eigen::MatrixXd> lower,
                std::vector<Eigen::MatrixXd> upper, int n, int k) {
        const size_t m = diag.size();
        require(m >= 1 && lower.size() == m && upper.size() == m, ErrorCode::ShapeMismatch,
                "block-tridiagonal factor: inconsistent block counts");
        n_ = n;
        k_ = k;
        lower_ = std::move(lower);
        upper_ = std::move(upper);
        sinv_ = std::move(diag);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu;
        for (size_t i = 0; i < m; ++i) {
            if (i > 0) subtract_schur_update(sinv_[i], lower_[i], sinv_[i - 1], upper_[i - 1]);
            lu.compute(sinv_[i]);
            const double rc = lu.rcond();
            if (!(rc > 1e-15) || !std::isfinite(rc)) {
                fail(ErrorCode::SingularJacobian, "singular Schur block at axial slice " + std::to_string(i + 1));
            }
            sinv_[i] = lu.inverse();
        }
    }

    [[nodiscard]] bool factored() const noexcept { return !sinv_.empty(); }
    [[nodiscard]] size_t slices() const noexcept { return sinv_.size(); }

    /// Solves in place; rhs[i] is an n x k block.
    void solve(std::vector<Eigen::MatrixXd>& rhs) const {
        const size_t m = sinv_.size();
        require(rhs.size() == m, ErrorCode::ShapeMismatch, "block-tridiagonal solve: rhs size mismatch");
        Eigen::MatrixXd tmp;
        for (size_t i = 0; i < m; ++i) {
            if (i > 0) rhs[i] -= rhs[i - 1] * lower_[i].transpose();
            tmp = rhs[i];
            apply_inverse(sinv_[i], tmp, rhs[i]);
        }
        for (size_t ii = m - 1; ii-- > 0;) {
            tmp = rhs[ii + 1] * upper_[ii].transpose();
            Eigen::MatrixXd corr;
            apply_inverse(sinv_[ii], tmp, corr);
            rhs[ii] -= corr;
        }
    }

private:
    void apply_inverse(const Eigen::MatrixXd& inv, const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const {
        Eigen::Map<const Eigen::VectorXd> x(in.data(), in.size());
        out.resize(in.rows(), in.cols());
        Eigen::Map<Eigen::VectorXd> y(out.data(), out.size());
        y.noalias() = inv * x;
    }

    /// target -= (l (x) I) prev_inv (u (x) I)
    void subtract_schur_update(Eigen::MatrixXd& target, const Eigen::MatrixXd& l, const Eigen::MatrixXd& prev_inv,
                               const Eigen::MatrixXd& u) const {
        if (k_ == 1) {
            target.noalias() -= (l(0, 0) * u(0, 0)) * prev_inv;
            return;
        }
        for (int r = 0; r < k_; ++r) {
            for (int s = 0; s < k_; ++s) {
                for (int p = 0; p < k_; ++p) {
                    if (l(r, p) == 0.0) continue;
                    for (int q = 0; q < k_; ++q) {
                        const double w = l(r, p) * u(q, s);
                        if (w == 0.0) continue;
                        target.block(r * n_, s * n_, n_, n_).noalias() -= w * prev_inv.block(p * n_, q * n_, n_, n_);
                    }
                }
            }
        }
    }

    int n_ = 0;
    int k_ = 1;
    std::vector<Eigen::MatrixXd> sinv_;
    std::vector<Eigen::MatrixXd> lower_;
    std::vector<Eigen::MatrixXd> upper_;
};

} // namespace ellab
