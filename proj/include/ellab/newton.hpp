#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ellab/error.hpp"

namespace ellab {

struct NewtonOptions {
    /// Sup-norm residual target.
    double tol_residual = 1e-8;
    int max_iters = 50;
    /// Residual-norm line search by halving.
    bool damping = true;
    int max_halvings = 30;
    double min_step = 1e-9;
};

struct NewtonTrace {
    int iterations = 0;
    std::vector<double> residuals;  // sup norms, one per visited iterate
    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os << "iterations=" << iterations << " residuals=[";
        for (size_t i = 0; i < residuals.size(); ++i) os << (i ? "," : "") << residuals[i];
        os << "]";
        return os.str();
    }
};

/// Damped Newton iteration on a flat unknown vector.
/// `residual(x)` returns R(x); `step(x, r)` returns d with J(x) d = -r.
template <class ResidualFn, class StepFn>
NewtonTrace newton_solve(Eigen::VectorXd& x, ResidualFn&& residual, StepFn&& step, const NewtonOptions& opts) {
    NewtonTrace trace;
    Eigen::VectorXd r = residual(x);
    for (;;) {
        require(r.allFinite(), ErrorCode::NonFiniteValue, "Newton residual is not finite");
        const double sup = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
        trace.residuals.push_back(sup);
        if (sup <= opts.tol_residual) return trace;
        if (trace.iterations >= opts.max_iters) {
            fail(ErrorCode::NewtonDiverged, "no convergence within max_iters; " + trace.describe());
        }
        ++trace.iterations;
        const Eigen::VectorXd d = step(x, r);
        require(d.allFinite(), ErrorCode::SingularJacobian, "Newton step is not finite");
        if (!opts.damping) {
            x += d;
            r = residual(x);
            continue;
        }
        const double r0 = r.norm();
        double lam = 1.0;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings && lam >= opts.min_step; ++h, lam *= 0.5) {
            Eigen::VectorXd trial = x + lam * d;
            Eigen::VectorXd rt = residual(trial);
            if (rt.allFinite() && rt.norm() <= (1.0 - 1e-4 * lam) * r0) {
                x = std::move(trial);
                r = std::move(rt);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            fail(ErrorCode::NewtonDiverged, "line search failed to reduce the residual; " + trace.describe());
        }
    }
}

} // namespace ellab
