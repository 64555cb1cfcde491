#include "parctl/operator_functions.hpp"

#include <sstream>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

void check_poles(const DiscreteOperator& op, const PartialFractionRational& r) {
  const SpectralBounds& b = op.bounds();
  for (const auto& p : r.poles()) {
    const std::complex<double> z(static_cast<double>(p.real()), static_cast<double>(p.imag()));
    if (distance_to_spectrum(b, z) <= 1e-12 * std::abs(b.lower)) {
      std::ostringstream msg;
      msg << "apply_rational: pole " << z << " lies inside the spectral enclosure [" << b.lower << ", " << b.upper
          << "]";
      throw NearSingularShift(msg.str());
    }
  }
}

}  // namespace

MeshFunction apply_rational(const DiscreteOperator& op, const PartialFractionRational& r, const MeshFunction& v,
                            ShiftedSolveCache* cache) {
  if (v.size() != op.dim()) throw DimensionMismatch("apply_rational: vector length differs from operator dimension");
  check_poles(op, r);
  MeshFunction out = static_cast<double>(r.constant()) * v;
  if (r.degree() == 0 || v.isZero(0.0)) return out;

  auto solve = [&](std::complex<double> z) {
    if (cache) return cache->get(z)->solve(v);
    return ShiftedSolver(op, z).solve(v);
  };
  const auto& poles = r.poles();
  const auto& res = r.residues();
  if (r.conjugation_closed()) {
    // (A - zeta)^{-1} = -(zeta - A)^{-1}; a conjugate pair contributes 2 Re(r x)
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const std::complex<double> z(static_cast<double>(poles[i].real()), static_cast<double>(poles[i].imag()));
      const std::complex<double> ri(static_cast<double>(res[i].real()), static_cast<double>(res[i].imag()));
      if (poles[i].imag() == 0) {
        out -= (ri * solve(z)).real();
      } else {
        out -= 2.0 * (ri * solve(z)).real();
        ++i;
      }
    }
    return out;
  }
  ComplexMeshFunction acc = out.cast<std::complex<double>>();
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const std::complex<double> z(static_cast<double>(poles[i].real()), static_cast<double>(poles[i].imag()));
    const std::complex<double> ri(static_cast<double>(res[i].real()), static_cast<double>(res[i].imag()));
    acc -= ri * solve(z);
  }
  const double re = acc.real().norm();
  const double im = acc.imag().norm();
  if (im > 1e-10 * std::max(re, v.norm())) {
    std::ostringstream msg;
    msg << "apply_rational: result has imaginary part " << im << " relative to " << re
        << " (pole set not closed under conjugation)";
    throw InvalidArgument(msg.str());
  }
  return acc.real();
}

FitCache& global_fit_cache() {
  static FitCache cache;
  return cache;
}

MeshFunction apply_symbol(const DiscreteOperator& op, const SymbolExpr& g, const MeshFunction& v,
                          ShiftedSolveCache* cache) {
  const FitResult fit = global_fit_cache().get(g, kMaxFitDegree, kOperatorFitTol);
  if (!fit.report.success) {
    std::ostringstream msg;
    msg << "fit of " << g.key() << " reached relative error " << static_cast<double>(fit.report.relative_error())
        << " at degree " << fit.report.degree << ", above tolerance " << kOperatorFitTol;
    throw Error("fit_failure", msg.str());
  }
  return apply_rational(op, fit.rational, v, cache);
}

FitResult precise_fit(const SymbolExpr& g) {
  FitResult fit = global_fit_cache().get(g, kMaxFitDegree, kPrecisionFitTol);
  if (fit.report.success) return fit;
  fit = global_fit_cache().get(g, kMaxFitDegree, kOperatorFitTol);
  if (!fit.report.success) {
    std::ostringstream msg;
    msg << "fit of " << g.key() << " reached relative error " << static_cast<double>(fit.report.relative_error())
        << " at degree " << fit.report.degree << ", above tolerance " << kOperatorFitTol;
    throw Error("fit_failure", msg.str());
  }
  return fit;
}

const PartialFractionRational& semigroup_rational(double t) {
  if (!(t > 0)) throw InvalidArgument("semigroup_rational: need t > 0");
  static std::mutex mutex;
  static std::map<double, PartialFractionRational> fits;
  std::lock_guard lock(mutex);
  auto it = fits.find(t);
  if (it == fits.end()) {
    const FitResult fit = fit_rational(SymbolExpr::exp(t), kMaxFitDegree, kOperatorFitTol);
    if (!fit.report.success) throw Error("fit_failure", "semigroup_rational: fit of e^{t lambda} failed");
    it = fits.emplace(t, fit.rational).first;
  }
  return it->second;
}

MeshFunction semigroup_apply(const DiscreteOperator& op, double t, const MeshFunction& v, ShiftedSolveCache* cache) {
  if (!(t >= 0)) throw InvalidArgument("semigroup_apply: need t >= 0");
  if (v.size() != op.dim()) throw DimensionMismatch("semigroup_apply: vector length differs from operator dimension");
  if (t == 0) return v;
  return apply_rational(op, semigroup_rational(t), v, cache);
}

}  // namespace parctl
