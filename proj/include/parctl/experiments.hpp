#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "parctl/config.hpp"
#include "parctl/control.hpp"
#include "parctl/sensitivity.hpp"

namespace parctl {

DiscreteOperator build_operator(const RunConfig& cfg);
/// Problem on `op` with epsilon = 1 (callers set it from Phi(0)).
ProblemSpec build_problem(const RunConfig& cfg, const DiscreteOperator& op);
/// "zero" descriptors give the zero vector; everything else goes through project_to_mesh.
MeshFunction project_field(const DiscreteOperator& op, const std::string& descriptor);

struct EpsilonResult {
  double fraction = 0.0;
  ControlSolution solution;
  double rel_distance_to_umin = 0.0;  // ||u - u_min||_M / ||u_min||_M
  double mass_fraction_mid = -1.0;    // 2D: share of y(T/2) inside the w ball
  double seconds = 0.0;
};

struct ExampleResult {
  double phi0 = 0.0;
  double phi0_seconds = 0.0;
  MeshFunction u_min;
  std::vector<EpsilonResult> runs;
  std::vector<std::pair<double, double>> phi_curve;
  double phi_curve_seconds = 0.0;
};

/// Per-eps solves plus snapshots at 0, T/2, T. With `with_phi_curve` the
/// Phi-curve of the [phi_curve] section is sampled as well. Artifacts go to
/// cfg.output_dir when `write` is set.
ExampleResult run_example(const RunConfig& cfg, bool with_phi_curve, bool write, std::ostream* log = nullptr);

struct PhiCurveResult {
  std::vector<std::pair<double, double>> samples;
  double phi0 = 0.0;
  int violations = 0;  // consecutive samples that fail to decrease
  double seconds = 0.0;
};
PhiCurveResult run_phi_curve(const RunConfig& cfg, bool write, std::ostream* log = nullptr);

struct ConvergenceResult {
  std::vector<FitReport> fit_reports;           // quotient symbol, by requested degree
  std::vector<FitReport> exp_reports;           // e^{lambda}, by requested degree
  std::vector<std::pair<int, double>> contour;  // (n, sup error)
  std::vector<std::pair<double, double>> refinement;  // (h, Phi(0))
};
ConvergenceResult run_convergence(const RunConfig& cfg, bool write, std::ostream* log = nullptr);

/// Nested 1D refinement (coarse data carried as a P1 function) or re-meshed
/// 2D refinement, Phi(0) per level.
std::vector<std::pair<double, double>> refinement_study(const RunConfig& cfg);

std::vector<SensitivityRow> run_sensitivity(const RunConfig& cfg, bool write, std::ostream* log = nullptr);

struct OracleCheckResult {
  double mu = 0.0, mu_oracle = 0.0;
  double u_rel = 0.0;
  double mu_rel = 0.0;
  double cost_rel = 0.0;
  double phi0 = 0.0, phi0_oracle = 0.0;
};
/// Rational path against the dense spectral path at the first eps fraction.
OracleCheckResult run_oracle_check(const RunConfig& cfg, bool write, std::ostream* log = nullptr);

}  // namespace parctl
