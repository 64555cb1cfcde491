#pragma once

#include <complex>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "parctl/symbol.hpp"

namespace parctl {

/// r(lambda) = r0 + sum_i r_i / (lambda - zeta_i).
///
/// Coefficients are stored in long double. Non-real poles of a
/// conjugation-closed rational are stored as adjacent pairs (zeta, conj zeta),
/// upper half-plane member first.
class PartialFractionRational {
 public:
  using Complex = std::complex<long double>;

  PartialFractionRational() = default;
  /// Throws InvalidArgument if a pole lies within 1e-8 of (-inf, 0].
  PartialFractionRational(long double r0, std::vector<Complex> poles, std::vector<Complex> residues);

  long double constant() const { return r0_; }
  const std::vector<Complex>& poles() const { return poles_; }
  const std::vector<Complex>& residues() const { return residues_; }
  int degree() const { return static_cast<int>(poles_.size()); }
  bool conjugation_closed() const { return conjugation_closed_; }

  Complex operator()(Complex lambda) const;
  /// Real part of r(lambda) for real lambda.
  long double real_value(long double lambda) const;

 private:
  long double r0_ = 0;
  std::vector<Complex> poles_;
  std::vector<Complex> residues_;
  bool conjugation_closed_ = true;
};

struct FitReport {
  int degree = 0;
  long double max_error = 0;  // max |r - g| on the validation grid
  long double norm = 0;       // RMS of g over the Chebyshev part of the grid
  double tol = 0;
  int samples = 0;
  bool success = false;

  long double relative_error() const { return norm > 0 ? max_error / norm : max_error; }
};

struct FitResult {
  PartialFractionRational rational;
  FitReport report;
};

/// m(z) = 9 (z - 1) / (z + 1), maps (-1, 1] onto (-inf, 0].
double moebius(double z);
/// m^{-1}(lambda) = (lambda + 9) / (9 - lambda).
double moebius_inv(double lambda);

/// Validation grid in lambda: Chebyshev points of the first kind in the
/// Moebius coordinate, lambda = 0, and log-spaced points in (-1e6, -1e-6).
const std::vector<long double>& fit_grid();

/// Rational approximation of degree <= max_degree with
/// max |r - g| <= tol * ||g|| on the validation grid. When the tolerance is
/// not reached the best rational found is returned with report.success false.
FitResult fit_rational(const SymbolExpr& g, int max_degree, double tol);

/// Common poles for several symbols; report i refers to symbol i.
struct SetFitResult {
  std::vector<PartialFractionRational> rationals;
  std::vector<FitReport> reports;
  bool success() const;
};
SetFitResult fit_rational_set(const std::vector<SymbolExpr>& gs, int max_degree, double tol);

/// Max |r - g| over the validation grid.
long double sampled_error(const PartialFractionRational& r, const SymbolExpr& g);

/// Trapezoid rule on a hyperbolic contour for the Cauchy integral of e^{t lambda}.
PartialFractionRational contour_exp(int n, double t);

/// "degree,error,norm,tol" rows.
void write_fit_reports_csv(std::ostream& os, const std::vector<FitReport>& reports);

/// Thread-safe memo of fits keyed by (symbol key, max degree, tol).
class FitCache {
 public:
  FitResult get(const SymbolExpr& g, int max_degree, double tol);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, FitResult> fits_;
};

}  // namespace parctl
