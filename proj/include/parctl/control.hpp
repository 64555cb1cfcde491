#pragma once

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "parctl/operator_functions.hpp"
#include "parctl/problem.hpp"

namespace parctl {

/// Problem data with the source absorbed into the targets.
struct HomogenizedData {
  double horizon = 0.0;
  double alpha = 0.0;
  MeshFunction ystar_hom;
  std::vector<MeshFunction> w_hom;  // per segment, sampled at the segment midpoint
  MeshFunction psi;
  SymbolExpr psi_symbol = SymbolExpr::constant(0);  // lambda -> alpha + int beta(t) e^{2 t lambda} dt
};

/// Integral over [0, t] of S_tau f(t - tau) for the piecewise-constant source.
MeshFunction source_response(const ProblemSpec& spec, const DiscreteOperator& op, double t,
                             ShiftedSolveCache* cache = nullptr);

HomogenizedData homogenize(const ProblemSpec& spec, const DiscreteOperator& op);

/// Snapshots y(t) = S_t u + source_response(t).
std::vector<MeshFunction> trajectory(const ProblemSpec& spec, const DiscreteOperator& op, const MeshFunction& u,
                                     const std::vector<double>& times);

/// alpha/2 ||u||^2 + 1/2 int beta ||y(t) - w(t)||^2 dt with 8-point Gauss per segment.
double cost_J(const ProblemSpec& spec, const DiscreteOperator& op, const MeshFunction& u);

struct ControlSolution {
  double epsilon = 0.0;
  double mu = 0.0;
  MeshFunction u;
  MeshFunction y_final;
  double cost = 0.0;
  double kkt = 0.0;
  double miss = 0.0;  // ||y(T) - y*||_M
  double phi0 = 0.0;
  std::vector<std::pair<double, double>> phi_curve;
};

/// Lagrange multiplier solver for one homogenized problem on one operator.
/// Phi values are memoized by mu; each mu uses its own factorizations.
class ControlSolver {
 public:
  ControlSolver(const DiscreteOperator& op, HomogenizedData data);

  const HomogenizedData& data() const { return data_; }
  const DiscreteOperator& op() const { return *op_; }

  /// Psi^{-1} psi.
  MeshFunction u_min();
  double phi(double mu);
  /// 0 if eps >= Phi(0), otherwise the root of Phi(mu) = eps.
  double solve_mu(double eps);
  /// r_a(A) y*_hom + r_b(A) psi from a shared-pole fit, then one refinement step u -= D^{-1} residual.
  MeshFunction optimal_control(double mu);
  /// ||Psi u - psi + mu (S_2T u - S_T y*_hom)||_M / max(1, ||psi||_M), with the mu term as mu S_T (S_T u - y*_hom).
  double kkt_residual(const MeshFunction& u, double mu);
  /// Phi at each mu, evaluated on `threads` worker threads.
  std::vector<std::pair<double, double>> phi_curve(const std::vector<double>& mus, int threads = 1);

  /// mu, u, final state, cost, KKT residual and miss for one tolerance.
  ControlSolution solve(const ProblemSpec& spec, double eps);

  int phi_evaluations() const { return phi_evaluations_; }

 private:
  SymbolExpr denominator(double mu) const;
  MeshFunction stationarity_residual(const MeshFunction& u, double mu) const;

  const DiscreteOperator* op_;
  HomogenizedData data_;
  std::mutex mutex_;
  std::map<double, double> phi_cache_;
  int phi_evaluations_ = 0;
  MeshFunction u_min_;
};

/// log-spaced grid of n points in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace parctl
