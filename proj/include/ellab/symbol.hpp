#pragma once

#include <cmath>
#include <complex>

#include "ellab/error.hpp"

namespace ellab {

/// Symbol of the factorized linear operator,
///   A_eps(z) = z / (c + sqrt(c^2 + eps^2 z)),  c = alpha + i beta,
/// with the principal square root (positive on the positive reals).
/// A negative real radicand has no preferred branch and is reported.
inline std::complex<double> symbol_A(std::complex<double> z, double alpha, double beta, double eps) {
    require(alpha > 0.0, ErrorCode::InvalidArgument, "symbol_A needs alpha > 0");
    require(eps >= 0.0, ErrorCode::InvalidArgument, "symbol_A needs eps >= 0");
    const std::complex<double> c(alpha, beta);
    const std::complex<double> rad = c * c + eps * eps * z;
    if (rad.real() < 0.0 && std::abs(rad.imag()) <= 1e-14 * std::abs(rad)) {
        fail(ErrorCode::BranchAmbiguity, "square-root argument is a negative real");
    }
    return z / (c + std::sqrt(rad));
}

} // namespace ellab
