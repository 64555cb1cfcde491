#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "parctl/discrete_operator.hpp"
#include "parctl/errors.hpp"
#include "parctl/operator_functions.hpp"
#include "parctl/oracle.hpp"
#include "parctl/rational.hpp"
#include "parctl/symbol.hpp"

using namespace parctl;
using Complex = PartialFractionRational::Complex;

namespace {

const DiscreteOperator& op64() {
  static const DiscreteOperator op = assemble_1d(DiffusionProfile1D::isotropic(), 65);
  return op;
}

const DenseSpectral& spectral64() {
  static const DenseSpectral ds = decompose(op64());
  return ds;
}

MeshFunction random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MeshFunction v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

double rel_m(const MeshFunction& a, const MeshFunction& b) { return norm_m(op64(), a - b) / norm_m(op64(), b); }

// sup |r - e^{t lambda}| on a dense lambda grid independent of the fitting grid
double dense_exp_error(const PartialFractionRational& r, double t) {
  double err = std::abs(static_cast<double>(r.real_value(0.0L)) - 1.0);
  for (int i = 0; i <= 4000; ++i) {
    const double lambda = -std::pow(10.0, -8.0 + 16.0 * i / 4000.0);
    err = std::max(err, std::abs(static_cast<double>(r.real_value(lambda)) - std::exp(t * lambda)));
  }
  return err;
}

}  // namespace

TEST_CASE("Moebius map") {
  CHECK(moebius(1.0) == 0.0);
  CHECK(moebius(0.0) == -9.0);
  CHECK_THROWS_AS(moebius(-1.0), InvalidArgument);
  CHECK_THROWS_AS(moebius_inv(9.0), InvalidArgument);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double z = -u(rng);  // (-1, 1]
    CHECK(moebius(z) <= 0.0);
    CHECK(moebius_inv(moebius(z)) == doctest::Approx(z).epsilon(1e-12));
  }
}

TEST_CASE("validation grid") {
  const auto& g = fit_grid();
  CHECK(g.size() >= 2200);
  for (long double x : g) CHECK(x <= 0.0L);
  CHECK(std::count(g.begin(), g.end(), 0.0L) == 1);
}

TEST_CASE("symbols") {
  SUBCASE("segment integral limit at zero") {
    const SymbolExpr s = symbol_segment_integral(0.25, 0.75, 2.0);
    CHECK(static_cast<double>(s(0.0L)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(static_cast<double>(s(-1e-9L)) == doctest::Approx(0.5).epsilon(1e-8));
  }
  SUBCASE("segment integral against adaptive quadrature") {
    const double T = 0.01;
    const SymbolExpr s = symbol_segment_integral(T / 3, 2 * T / 3, 2.0);
    const double quad = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double t) { return std::exp(-2.0 * t); }, T / 3, 2 * T / 3, 15, 1e-15);
    CHECK(std::abs(static_cast<double>(s(-1.0L)) - quad) <= 1e-12 * quad);
    const SymbolExpr whole = symbol_segment_integral(0.0, T, 2.0);
    const DiscreteOperator op = assemble_1d(DiffusionProfile1D::isotropic(), 40);
    CHECK(whole(op.bounds().upper) > 0.0L);
  }
  SUBCASE("removable singularity through the Laurent expansion") {
    const SymbolExpr q = (SymbolExpr::exp(0.3L) - SymbolExpr::constant(1)) * SymbolExpr::reciprocal();
    for (long double x : {-1e-7L, -1e-9L, 0.0L}) {
      const long double exact = x == 0 ? 0.3L : std::expm1(0.3L * x) / x;
      CHECK(std::abs(q(x) - exact) <= 1e-15L);
    }
  }
  SUBCASE("keys identify symbols") {
    const SymbolExpr a = SymbolExpr::exp(0.5L) / (SymbolExpr::constant(2) + SymbolExpr::exp(1.0L));
    const SymbolExpr b = SymbolExpr::exp(0.5L) / (SymbolExpr::constant(2) + SymbolExpr::exp(1.0L));
    const SymbolExpr c = SymbolExpr::exp(0.5L) / (SymbolExpr::constant(3) + SymbolExpr::exp(1.0L));
    CHECK(a.key() == b.key());
    CHECK(a.key() != c.key());
  }
  SUBCASE("exp rejects negative rates") { CHECK_THROWS_AS(SymbolExpr::exp(-1.0L), InvalidArgument); }
}

TEST_CASE("partial fraction form") {
  CHECK_THROWS_AS(PartialFractionRational(0, {Complex(-1, 0)}, {Complex(1, 0)}), InvalidArgument);
  CHECK_THROWS_AS(PartialFractionRational(0, {Complex(1, 0)}, {}), InvalidArgument);
  const PartialFractionRational paired(0.5L, {Complex(1, -2), Complex(1, 2)}, {Complex(3, -1), Complex(3, 1)});
  CHECK(paired.conjugation_closed());
  CHECK(paired.poles()[0].imag() > 0);
  const long double x = -2.5L;
  const Complex direct = 0.5L + Complex(3, -1) / (x - Complex(1, -2)) + Complex(3, 1) / (x - Complex(1, 2));
  CHECK(std::abs(paired(x) - direct) <= 1e-15L);
  CHECK(std::abs(paired.real_value(x) - direct.real()) <= 1e-15L);
  const PartialFractionRational lone(0, {Complex(1, 2)}, {Complex(1, 0)});
  CHECK_FALSE(lone.conjugation_closed());
}

TEST_CASE("fitting") {
  SUBCASE("constant symbol is exact at degree zero") {
    const FitResult f = fit_rational(SymbolExpr::constant(1), 0, 1e-12);
    CHECK(f.report.success);
    CHECK(f.rational.degree() == 0);
    CHECK(std::abs(f.rational.constant() - 1.0L) <= 1e-15L);
    CHECK(f.report.max_error <= 1e-15L);
  }
  SUBCASE("rational symbol is recovered") {
    const SymbolExpr g = SymbolExpr::constant(1) / (SymbolExpr::constant(1) - SymbolExpr::lambda());
    const FitResult f = fit_rational(g, 4, 1e-12);
    CHECK(f.report.success);
    REQUIRE(f.rational.degree() == 1);
    CHECK(std::abs(f.rational.poles()[0] - Complex(1, 0)) <= 1e-10L);
    CHECK(std::abs(f.rational.residues()[0] - Complex(-1, 0)) <= 1e-10L);
  }
  SUBCASE("semigroup symbol at the experiment setting") {
    const FitResult f = fit_rational(SymbolExpr::exp(0.01L), 18, 1e-15);
    CHECK(f.report.success);
    CHECK(f.rational.degree() <= 18);
    CHECK(f.report.max_error <= 1e-15L * f.report.norm);
    CHECK(f.rational.conjugation_closed());
    for (const auto& z : f.rational.poles()) CHECK((z.real() > 0 || std::abs(z.imag()) > 1e-8L));
  }
  SUBCASE("error decays geometrically with the degree") {
    long double previous = 0;
    for (int d : {4, 6, 8, 10, 12}) {
      const FitResult f = fit_rational(SymbolExpr::exp(1.0L), d, 1e-30);
      CHECK_FALSE(f.report.success);
      CHECK(f.report.degree <= d);
      if (previous > 0) CHECK(f.report.max_error <= 0.5L * previous);
      previous = f.report.max_error;
    }
  }
  SUBCASE("unreachable tolerance reports the best error") {
    const FitResult f = fit_rational(SymbolExpr::exp(1.0L), 2, 1e-14);
    CHECK_FALSE(f.report.success);
    CHECK(f.report.max_error > 1e-14L * f.report.norm);
    CHECK(f.report.max_error == doctest::Approx(static_cast<double>(sampled_error(f.rational, SymbolExpr::exp(1.0L)))));
  }
  SUBCASE("shared poles for a set of symbols") {
    const SymbolExpr d = SymbolExpr::constant(2) * SymbolExpr::exp(0.02L) + SymbolExpr::constant(0.5);
    const SetFitResult s = fit_rational_set({SymbolExpr::exp(0.02L) / d, SymbolExpr::constant(1) / d}, 30, 1e-12);
    CHECK(s.success());
    REQUIRE(s.rationals.size() == 2);
    CHECK(s.rationals[0].degree() == s.rationals[1].degree());
    for (int i = 0; i < s.rationals[0].degree(); ++i) CHECK(s.rationals[0].poles()[i] == s.rationals[1].poles()[i]);
  }
  SUBCASE("invalid arguments") {
    CHECK_THROWS_AS(fit_rational(SymbolExpr::exp(1.0L), -1, 1e-8), InvalidArgument);
    CHECK_THROWS_AS(fit_rational(SymbolExpr::exp(1.0L), 4, 0.0), InvalidArgument);
  }
  SUBCASE("report CSV") {
    std::ostringstream os;
    write_fit_reports_csv(os, {fit_rational(SymbolExpr::exp(1.0L), 4, 1e-30).report});
    CHECK(os.str().rfind("degree,error,norm,tol\n", 0) == 0);
  }
}

TEST_CASE("contour quadrature for the exponential") {
  const PartialFractionRational r12 = contour_exp(12, 1.0), r16 = contour_exp(16, 1.0), r24 = contour_exp(24, 1.0);
  const double e12 = dense_exp_error(r12, 1.0), e16 = dense_exp_error(r16, 1.0), e24 = dense_exp_error(r24, 1.0);
  CHECK(e16 / e12 <= std::pow(3.2, -4.0) * 10.0);
  CHECK(e24 <= 1e-9);
  CHECK(std::abs(static_cast<double>(r24.real_value(0.0L)) - 1.0) <= e24);
  CHECK(r24.conjugation_closed());
  const PartialFractionRational scaled = contour_exp(24, 0.01);
  CHECK(dense_exp_error(scaled, 0.01) <= 1e-9);
  CHECK_THROWS_AS(contour_exp(3, 1.0), InvalidArgument);
  CHECK_THROWS_AS(contour_exp(8, 0.0), InvalidArgument);
}

TEST_CASE("applying rationals to the operator") {
  const DiscreteOperator& op = op64();
  const MeshFunction v = random_vector(op.dim(), 5);

  SUBCASE("constant rational") {
    const PartialFractionRational one(1.0L, {}, {});
    CHECK((apply_rational(op, one, v) - v).norm() == 0.0);
  }
  SUBCASE("single pole equals the shifted solve") {
    const PartialFractionRational r(0, {Complex(1, 0)}, {Complex(-1, 0)});
    const MeshFunction x = solve_shifted(op, 1.0, v).real();
    CHECK(rel_m(apply_rational(op, r, v), x) <= 1e-12);
  }
  SUBCASE("fitted semigroup matches the dense oracle") {
    const FitResult f = fit_rational(SymbolExpr::exp(0.01L), 40, 1e-12);
    REQUIRE(f.report.success);
    const MeshFunction exact = oracle_apply(spectral64(), SymbolExpr::exp(0.01L), v);
    CHECK(rel_m(apply_rational(op, f.rational, v), exact) <= 1e-8);
  }
  SUBCASE("linearity") {
    const PartialFractionRational& r = semigroup_rational(0.005);
    const MeshFunction w = random_vector(op.dim(), 6);
    const MeshFunction lhs = apply_rational(op, r, 2.0 * v - 3.0 * w);
    const MeshFunction rhs = 2.0 * apply_rational(op, r, v) - 3.0 * apply_rational(op, r, w);
    CHECK(norm_m(op, lhs - rhs) <= 1e-10 * norm_m(op, rhs));
  }
  SUBCASE("cached factorizations give identical results") {
    ShiftedSolveCache cache(op);
    const PartialFractionRational& r = semigroup_rational(0.005);
    const MeshFunction a = apply_rational(op, r, v, &cache);
    const MeshFunction b = apply_rational(op, r, v, &cache);
    CHECK((a - b).norm() == 0.0);
    CHECK((a - apply_rational(op, r, v)).norm() <= 1e-14 * a.norm());
  }
}

TEST_CASE("semigroup") {
  const DiscreteOperator& op = op64();
  const MeshFunction v = random_vector(op.dim(), 9);
  const double T = 0.01;
  CHECK((semigroup_apply(op, 0.0, v) - v).norm() == 0.0);
  CHECK_THROWS_AS(semigroup_apply(op, -1.0, v), InvalidArgument);
  const MeshFunction half = semigroup_apply(op, T / 2, semigroup_apply(op, T / 2, v));
  CHECK(norm_m(op, half - semigroup_apply(op, T, v)) <= 1e-8 * norm_m(op, v));
  double previous = norm_m(op, v);
  for (double t : {T / 4, T / 2, T, 2 * T}) {
    const double n = norm_m(op, semigroup_apply(op, t, v));
    CHECK(n < previous);
    previous = n;
  }
  CHECK(&semigroup_rational(T) == &semigroup_rational(T));
}

TEST_CASE("oracle equivalence for the control symbols") {
  const DiscreteOperator& op = op64();
  const MeshFunction v = random_vector(op.dim(), 13);
  const double T = 0.01;
  const SymbolExpr psi = SymbolExpr::constant(1e-4) + symbol_segment_integral(T / 3, 2 * T / 3, 2.0);
  std::vector<SymbolExpr> symbols{SymbolExpr::exp(T), SymbolExpr::constant(1) / psi,
                                  symbol_segment_integral(0.0, T, 1.0)};
  for (double mu : {0.0, 1.0, 1e4, 1e8}) {
    const SymbolExpr d = SymbolExpr::constant(mu) * SymbolExpr::exp(2 * T) + psi;
    symbols.push_back(SymbolExpr::constant(mu) * SymbolExpr::exp(2 * T) / d);
    symbols.push_back(SymbolExpr::exp(T) / d);
  }
  for (const auto& g : symbols) {
    const FitResult f = fit_rational(g, kMaxFitDegree, kOperatorFitTol);
    REQUIRE(f.report.success);
    CHECK(f.rational.conjugation_closed());
    const MeshFunction exact = oracle_apply(spectral64(), g, v);
    const double bound = static_cast<double>(f.report.max_error) + 1e-9;
    CHECK(norm_m(op, apply_rational(op, f.rational, v) - exact) <= bound * norm_m(op, v));
  }
}

TEST_CASE("fit cache") {
  FitCache cache;
  const FitResult a = cache.get(SymbolExpr::exp(0.3L), 20, 1e-10);
  const FitResult b = cache.get(SymbolExpr::exp(0.3L), 20, 1e-10);
  CHECK(cache.size() == 1);
  CHECK(a.rational.poles() == b.rational.poles());
  cache.get(SymbolExpr::exp(0.3L), 20, 1e-11);
  CHECK(cache.size() == 2);
}
