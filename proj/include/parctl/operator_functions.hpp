#pragma once

#include "parctl/discrete_operator.hpp"
#include "parctl/rational.hpp"

namespace parctl {

/// r(A) v = r0 v + sum_i r_i (A - zeta_i)^{-1} v.
///
/// Conjugate pole pairs share one solve. Throws NearSingularShift before any
/// solve if a pole falls inside the spectral enclosure of `op`. Terms are summed
/// in pole order. When `cache` is given, factorizations are reused across calls.
MeshFunction apply_rational(const DiscreteOperator& op, const PartialFractionRational& r, const MeshFunction& v,
                            ShiftedSolveCache* cache = nullptr);

/// Fit of e^{t lambda} at tol 1e-12 used by semigroup_apply (memoized per t).
const PartialFractionRational& semigroup_rational(double t);

/// S_t v = e^{tA} v; t = 0 returns v.
MeshFunction semigroup_apply(const DiscreteOperator& op, double t, const MeshFunction& v,
                             ShiftedSolveCache* cache = nullptr);

/// Fit tolerance and degree cap shared by the operator-function routines.
inline constexpr double kOperatorFitTol = 1e-12;
inline constexpr int kMaxFitDegree = 40;
/// Tighter tolerance for assembling the optimal control and its KKT residual.
inline constexpr double kPrecisionFitTol = 1e-14;

/// g(A) v through a cached fit of g at kOperatorFitTol; throws if the fit fails.
MeshFunction apply_symbol(const DiscreteOperator& op, const SymbolExpr& g, const MeshFunction& v,
                          ShiftedSolveCache* cache = nullptr);

/// Fit of g at kPrecisionFitTol, or at kOperatorFitTol if that fails; throws if both fail.
FitResult precise_fit(const SymbolExpr& g);

/// Process-wide memo of symbol fits.
FitCache& global_fit_cache();

}  // namespace parctl
