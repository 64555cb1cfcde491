#pragma once

#include <Eigen/Dense>

#include "parctl/control.hpp"

namespace parctl {

/// Dense eigendecomposition of A = -M^{-1} K: eigenvalues ascending (most
/// negative first) and M-orthonormal eigenvectors as columns.
struct DenseSpectral {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd mass;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  /// <v, v_k>_M for every k.
  Eigen::VectorXd coefficients(const MeshFunction& v) const;
  MeshFunction synthesize(const Eigen::VectorXd& coefficients) const;
};

inline constexpr int kOracleMaxDim = 200;

/// Rejects operators with more than 200 degrees of freedom.
DenseSpectral decompose(const DiscreteOperator& op);

/// sum_k g(lambda_k) <v, v_k>_M v_k; throws if g is singular at an eigenvalue.
MeshFunction oracle_apply(const DenseSpectral& ds, const SymbolExpr& g, const MeshFunction& v);

/// Whole control pipeline evaluated on eigencomponents, mu by bisection to
/// 1e-12 relative. The source enters through the same midpoint-sampled w_hom as
/// homogenize(), so both paths solve the same discrete problem.
class OracleControl {
 public:
  OracleControl(const ProblemSpec& spec, const DiscreteOperator& op);

  const DenseSpectral& spectral() const { return ds_; }
  double phi(double mu) const;
  double solve_mu(double eps) const;
  MeshFunction u_min() const { return control(0.0); }
  MeshFunction control(double mu) const;
  MeshFunction final_state(const MeshFunction& u) const;
  double cost(const MeshFunction& u) const;
  double kkt_residual(const MeshFunction& u, double mu) const;
  ControlSolution solve(double eps) const;

 private:
  ProblemSpec spec_;
  DenseSpectral ds_;
  Eigen::VectorXd y_;      // coefficients of y*_hom
  Eigen::VectorXd psi_;    // coefficients of psi
  Eigen::VectorXd psi_symbol_;  // alpha + beta_0 at the eigenvalues
  Eigen::VectorXd source_T_;    // coefficients of the source response at T
  std::vector<Eigen::VectorXd> w_hom_;
};

ControlSolution oracle_solve_control(const ProblemSpec& spec, const DiscreteOperator& op);

}  // namespace parctl
