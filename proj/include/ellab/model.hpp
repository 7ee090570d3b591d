#pragma once

#include "ellab/coupling.hpp"
#include "ellab/field.hpp"
#include "ellab/grid.hpp"
#include "ellab/nonlinearity.hpp"

namespace ellab {

/// The static data of the problem: coefficients, interaction and domain.
///
/// Sign convention shared by every solver: the forcing enters as
///   a(eps^2 d_t^2 u + Delta_x u) - gamma d_t u - f(u) = g,
/// so the eps = 0 flow is gamma d_t u = a Delta_x u - f(u) - g and
/// equilibria solve a Delta_x z - f(z) - gbar = 0.
struct Problem {
    CouplingMatrices mats;
    Nonlinearity nl;
    SpatialGrid grid;

    [[nodiscard]] int k() const noexcept { return mats.k; }

    void validate() const {
        mats.validate();
        require(nl.k == mats.k, ErrorCode::ShapeMismatch, "nonlinearity and coupling matrices disagree on k");
    }
};

} // namespace ellab
