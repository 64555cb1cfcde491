#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "parctl/control.hpp"
#include "parctl/errors.hpp"
#include "parctl/oracle.hpp"
#include "parctl/projection.hpp"

using namespace parctl;
using std::numbers::pi;

namespace {

constexpr double kT = 0.01;

MeshFunction random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  MeshFunction v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

ProblemSpec isotropic_problem(const DiscreteOperator& op, double beta = 1.0) {
  ProblemSpec spec;
  spec.horizon = kT;
  spec.alpha = 1e-4;
  spec.segments =
      window_segments(kT, kT / 3, 2 * kT / 3, beta, project_to_mesh(op, IntervalIndicator{pi / 5, 2 * pi / 5}));
  spec.ystar = project_to_mesh(op, IntervalIndicator{3 * pi / 5, 4 * pi / 5});
  spec.epsilon = 1.0;
  return spec;
}

const DiscreteOperator& op64() {
  static const DiscreteOperator op = assemble_1d(DiffusionProfile1D::isotropic(), 65);
  return op;
}

const DiscreteOperator& op_example() {
  static const DiscreteOperator op = assemble_1d(DiffusionProfile1D::isotropic(), elements_for_mesh_size(1.0 / 20.0));
  return op;
}

double rel(const DiscreteOperator& op, const MeshFunction& a, const MeshFunction& b) {
  return norm_m(op, a - b) / norm_m(op, b);
}

}  // namespace

TEST_CASE("problem validation") {
  const DiscreteOperator& op = op64();
  ProblemSpec spec = isotropic_problem(op);
  CHECK_NOTHROW(spec.validate(op.dim()));
  ProblemSpec bad = spec;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(op.dim()), InvalidArgument);
  bad = spec;
  bad.segments[1].begin += 1e-4;
  CHECK_THROWS_AS(bad.validate(op.dim()), InvalidArgument);
  bad = spec;
  bad.segments[0].beta = -1.0;
  CHECK_THROWS_AS(bad.validate(op.dim()), InvalidArgument);
  bad = spec;
  bad.ystar = MeshFunction::Zero(3);
  CHECK_THROWS_AS(bad.validate(op.dim()), DimensionMismatch);
  CHECK_THROWS_AS(homogenize(bad, op), DimensionMismatch);
  CHECK_FALSE(spec.has_source());
}

TEST_CASE("homogenization") {
  const DiscreteOperator& op = op64();
  SUBCASE("no source leaves the targets untouched") {
    const ProblemSpec spec = isotropic_problem(op);
    const HomogenizedData hd = homogenize(spec, op);
    CHECK((hd.ystar_hom - spec.ystar).norm() == 0.0);
    for (std::size_t i = 0; i < spec.segments.size(); ++i) CHECK((hd.w_hom[i] - spec.w_of(i, op.dim())).norm() == 0.0);
    for (long double x : {0.0L, -1.0L, -1e3L, -1e6L}) CHECK(hd.psi_symbol(x) >= 1e-4L);
  }
  SUBCASE("zero trajectory target gives zero psi") {
    ProblemSpec spec = isotropic_problem(op);
    for (auto& s : spec.segments) s.w = MeshFunction::Zero(op.dim());
    CHECK(homogenize(spec, op).psi.norm() == 0.0);
  }
  SUBCASE("constant source response matches A^{-1}(S_T - I) f") {
    ProblemSpec spec = isotropic_problem(op);
    const MeshFunction f = random_vector(op.dim(), 21);
    for (auto& s : spec.segments) s.f = f;
    CHECK(spec.has_source());
    const DenseSpectral ds = decompose(op);
    const MeshFunction exact =
        oracle_apply(ds, (SymbolExpr::exp(kT) - SymbolExpr::constant(1)) * SymbolExpr::reciprocal(), f);
    CHECK(rel(op, source_response(spec, op, kT), exact) <= 1e-8);
    const HomogenizedData hd = homogenize(spec, op);
    CHECK(rel(op, hd.ystar_hom, spec.ystar - exact) <= 1e-8);
    CHECK(source_response(spec, op, 0.0).norm() == 0.0);
  }
}

TEST_CASE("unconstrained minimizer") {
  const DiscreteOperator& op = op64();
  SUBCASE("matches the spectral oracle") {
    const ProblemSpec spec = isotropic_problem(op);
    ControlSolver solver(op, homogenize(spec, op));
    const OracleControl oracle(spec, op);
    CHECK(rel(op, solver.u_min(), oracle.u_min()) <= 1e-8);
  }
  SUBCASE("zero beta gives psi / alpha") {
    const ProblemSpec spec = isotropic_problem(op, 0.0);
    const HomogenizedData hd = homogenize(spec, op);
    ControlSolver solver(op, hd);
    CHECK(norm_m(op, solver.u_min() - hd.psi / spec.alpha) == 0.0);
  }
  SUBCASE("zero psi gives zero") {
    ProblemSpec spec = isotropic_problem(op);
    for (auto& s : spec.segments) s.w = MeshFunction::Zero(op.dim());
    ControlSolver solver(op, homogenize(spec, op));
    CHECK(solver.u_min().norm() == 0.0);
  }
}

TEST_CASE("Phi") {
  SUBCASE("value at zero for the isotropic example") {
    const DiscreteOperator& op = op_example();
    const ProblemSpec spec = isotropic_problem(op);
    ControlSolver solver(op, homogenize(spec, op));
    const double phi0 = solver.phi(0.0);
    CHECK(std::abs(phi0 - 1.0374) <= 0.02 * 1.0374);
    const MeshFunction y_min = semigroup_apply(op, kT, solver.u_min());
    CHECK(norm_m(op, y_min - spec.ystar) == doctest::Approx(phi0).epsilon(1e-10));
  }
  SUBCASE("strictly decreasing and equal to the oracle") {
    const DiscreteOperator& op = op64();
    const ProblemSpec spec = isotropic_problem(op);
    ControlSolver solver(op, homogenize(spec, op));
    const OracleControl oracle(spec, op);
    double previous = solver.phi(0.0);
    for (double mu : log_grid(1e-4, 1e10, 20)) {
      const double p = solver.phi(mu);
      CHECK(p < previous);
      CHECK(std::abs(p - oracle.phi(mu)) <= 1e-9 * oracle.phi(0.0));
      previous = p;
    }
    CHECK_THROWS_AS(solver.phi(-1.0), InvalidArgument);
  }
  SUBCASE("vanishes for zero data") {
    const DiscreteOperator& op = op64();
    ProblemSpec spec = isotropic_problem(op);
    spec.ystar.setZero();
    for (auto& s : spec.segments) s.w = MeshFunction::Zero(op.dim());
    ControlSolver solver(op, homogenize(spec, op));
    for (double mu : {0.0, 1.0, 1e6}) CHECK(solver.phi(mu) == 0.0);
    CHECK(solver.optimal_control(1.0).norm() == 0.0);
  }
  SUBCASE("curve on worker threads equals the serial curve") {
    const DiscreteOperator& op = op64();
    const ProblemSpec spec = isotropic_problem(op);
    ControlSolver a(op, homogenize(spec, op)), b(op, homogenize(spec, op));
    const auto mus = log_grid(1e-3, 1e6, 12);
    const auto serial = a.phi_curve(mus, 1), parallel = b.phi_curve(mus, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].second == parallel[i].second);
  }
}

TEST_CASE("root finding for mu") {
  const DiscreteOperator& op = op_example();
  const ProblemSpec spec = isotropic_problem(op);
  ControlSolver solver(op, homogenize(spec, op));
  const double phi0 = solver.phi(0.0);
  CHECK(solver.solve_mu(phi0) == 0.0);
  CHECK(solver.solve_mu(3 * phi0) == 0.0);
  CHECK_THROWS_AS(solver.solve_mu(0.0), InvalidArgument);

  const double eps = 0.5 * phi0;
  const double mu = solver.solve_mu(eps);
  CHECK(std::abs(solver.phi(mu) - eps) <= 1e-8 * phi0);
  // independent bisection on the same Phi
  double lo = 0.0, hi = 1.0;
  while (solver.phi(hi) > eps) hi *= 10;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (solver.phi(mid) > eps ? lo : hi) = mid;
  }
  CHECK(std::abs(mu - 0.5 * (lo + hi)) <= 1e-8 * mu);

  double previous = 0.0;
  for (double frac : {0.9, 0.5, 0.2}) {
    const double m = solver.solve_mu(frac * phi0);
    CHECK(m > previous);
    previous = m;
  }
}

TEST_CASE("optimal control") {
  const DiscreteOperator& op = op64();
  const ProblemSpec spec = isotropic_problem(op);
  ControlSolver solver(op, homogenize(spec, op));
  CHECK(rel(op, solver.optimal_control(0.0), solver.u_min()) <= 1e-10);

  SUBCASE("dense solve of the stationarity system at mu = 1") {
    const DenseSpectral ds = decompose(op);
    const HomogenizedData& hd = solver.data();
    const double mu = 1.0;
    // (mu S_2T + Psi) x = mu S_T y + psi, diagonal in the eigenbasis
    const Eigen::VectorXd y = ds.coefficients(hd.ystar_hom), p = ds.coefficients(hd.psi);
    Eigen::VectorXd x(ds.dim());
    for (int k = 0; k < ds.dim(); ++k) {
      const double l = ds.eigenvalues[k];
      x[k] = (mu * std::exp(kT * l) * y[k] + p[k]) /
             (mu * std::exp(2 * kT * l) + static_cast<double>(hd.psi_symbol(l)));
    }
    CHECK(rel(op, solver.optimal_control(mu), ds.synthesize(x)) <= 1e-8);
  }
  SUBCASE("end-to-end agreement with the oracle") {
    const OracleControl oracle(spec, op);
    const double eps = 0.2 * oracle.phi(0.0);
    const ControlSolution s = solver.solve(spec, eps);
    const ControlSolution o = oracle.solve(eps);
    CHECK(std::abs(s.mu - o.mu) <= 1e-8 * o.mu);
    CHECK(rel(op, s.u, o.u) <= 1e-7);
    CHECK(std::abs(s.cost - o.cost) <= 1e-6 * o.cost);
  }
}

TEST_CASE("trajectory, cost and KKT residual") {
  const DiscreteOperator& op = op_example();
  const ProblemSpec spec = isotropic_problem(op);
  ControlSolver solver(op, homogenize(spec, op));
  const double phi0 = solver.phi(0.0);
  const double eps = 0.2 * phi0;
  const ControlSolution s = solver.solve(spec, eps);

  SUBCASE("snapshots") {
    const auto ys = trajectory(spec, op, s.u, {0.0, kT / 2, kT});
    CHECK((ys[0] - s.u).norm() == 0.0);
    CHECK((ys[2] - semigroup_apply(op, kT, s.u)).norm() <= 1e-14 * ys[2].norm());
    CHECK(std::abs(norm_m(op, ys[2] - spec.ystar) - eps) <= 1e-6);
    CHECK(std::abs(s.miss - eps) <= 1e-6);
  }
  SUBCASE("stationarity") {
    CHECK(s.kkt <= 1e-6);
    CHECK(solver.kkt_residual(solver.u_min(), 0.0) <= 1e-8);
    const MeshFunction bumped = s.u + 1e-3 * norm_m(op, s.u) * random_vector(op.dim(), 8) / std::sqrt(pi);
    CHECK(solver.kkt_residual(bumped, s.mu) > s.kkt);
  }
  SUBCASE("zero data has zero cost") {
    ProblemSpec zero = spec;
    zero.ystar.setZero();
    for (auto& seg : zero.segments) seg.w = MeshFunction::Zero(op.dim());
    CHECK(cost_J(zero, op, MeshFunction::Zero(op.dim())) == 0.0);
  }
  SUBCASE("optimality against feasible perturbations") {
    const double j_opt = cost_J(spec, op, s.u);
    CHECK(cost_J(spec, op, solver.u_min()) <= j_opt);
    int accepted = 0;
    for (std::uint64_t seed = 100; accepted < 10 && seed < 200; ++seed) {
      const MeshFunction d = random_vector(op.dim(), seed);
      for (double sign : {1.0, -1.0}) {
        const MeshFunction u = s.u + sign * 0.05 * norm_m(op, s.u) * d / norm_m(op, d);
        if (norm_m(op, semigroup_apply(op, kT, u) - spec.ystar) > eps) continue;
        CHECK(j_opt <= cost_J(spec, op, u));
        ++accepted;
        break;
      }
    }
    CHECK(accepted == 10);
  }
  SUBCASE("cost equals the bilinear form") {
    // J(u) = 1/2 <Psi u, u> - <psi, u> + 1/2 sum_i beta_i |I_i| ||w_i||^2 when f = 0
    const DiscreteOperator& small = op64();
    const ProblemSpec sp = isotropic_problem(small);
    const DenseSpectral ds = decompose(small);
    SymbolExpr psi_symbol = SymbolExpr::constant(sp.alpha);
    MeshFunction psi = MeshFunction::Zero(small.dim());
    double constant = 0.0;
    for (std::size_t i = 0; i < sp.segments.size(); ++i) {
      const TimeSegment& seg = sp.segments[i];
      if (seg.beta == 0.0) continue;
      psi_symbol = psi_symbol + SymbolExpr::constant(seg.beta) * symbol_segment_integral(seg.begin, seg.end, 2.0);
      psi += seg.beta * oracle_apply(ds, symbol_segment_integral(seg.begin, seg.end, 1.0), sp.w_of(i, small.dim()));
      const double wn = norm_m(small, sp.w_of(i, small.dim()));
      constant += 0.5 * seg.beta * seg.length() * wn * wn;
    }
    for (std::uint64_t seed : {31, 32, 33}) {
      const MeshFunction u = random_vector(small.dim(), seed);
      const double form = 0.5 * inner_m(small, oracle_apply(ds, psi_symbol, u), u) - inner_m(small, psi, u) + constant;
      CHECK(std::abs(cost_J(sp, small, u) - form) <= 1e-6 * std::abs(form));
    }
  }
}

TEST_CASE("log grid") {
  const auto g = log_grid(1e-2, 1e2, 5);
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1e-2));
  CHECK(g[2] == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1e2));
}
