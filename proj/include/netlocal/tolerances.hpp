#pragma once

namespace netlocal::tol {

// Centralized probability tolerances. Structural checks (simplex
// normalization, nonnegativity of stored parameters) are tight; behaviour
// normalization is looser to absorb accumulated contraction rounding.
inline constexpr double structural = 1e-12;
inline constexpr double behaviour_norm = 1e-9;

}  // namespace netlocal::tol
