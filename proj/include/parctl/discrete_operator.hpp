#pragma once

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "parctl/mesh.hpp"

namespace parctl {

using MeshFunction = Eigen::VectorXd;
using ComplexMeshFunction = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using ComplexSparseMatrix = Eigen::SparseMatrix<std::complex<double>>;

/// Mesh plus the map between mesh vertices and interior degrees of freedom.
struct OperatorGeometry {
  std::variant<Mesh1D, MeshLShape> mesh;
  std::vector<int> vertex_to_dof;  // -1 on Dirichlet vertices
  std::vector<int> dof_to_vertex;

  int spatial_dim() const { return std::holds_alternative<Mesh1D>(mesh) ? 1 : 2; }
  Point2 dof_point(int dof) const;
};

/// Enclosure [lower, upper] of the spectrum of A = -M^{-1} K.
struct SpectralBounds {
  double lower = 0.0;  // lambda_min_hat, below the most negative eigenvalue
  double upper = 0.0;  // kappa_hat, above the eigenvalue closest to zero, <= 0
};

/// Lumped-mass Galerkin discretization of a self-adjoint, strictly negative
/// operator: A = -M^{-1} K with K symmetric positive definite and M diagonal.
///
/// A is self-adjoint in the M-weighted inner product, so every operator
/// function is realised through real-symmetric shifted systems (zM + K).
/// Immutable after construction and safe to share between threads.
class DiscreteOperator {
 public:
  DiscreteOperator(SparseMatrix stiffness, Eigen::VectorXd lumped_mass,
                   std::shared_ptr<const OperatorGeometry> geometry);

  int dim() const { return static_cast<int>(mass_.size()); }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const Eigen::VectorXd& mass() const { return mass_; }
  const OperatorGeometry& geometry() const { return *geometry_; }
  std::shared_ptr<const OperatorGeometry> geometry_ptr() const { return geometry_; }
  const SpectralBounds& bounds() const { return bounds_; }

  /// Same geometry, different stiffness (used for operator perturbations).
  DiscreteOperator with_stiffness(SparseMatrix stiffness) const;

 private:
  SparseMatrix stiffness_;
  Eigen::VectorXd mass_;
  std::shared_ptr<const OperatorGeometry> geometry_;
  SpectralBounds bounds_;
};

/// Piecewise-constant diffusion a_left on [0, interface) and a_right on
/// [interface, pi]. The interface is snapped to the nearest mesh node.
struct DiffusionProfile1D {
  double a_left = 1.0;
  double a_right = 1.0;
  double interface = 2.2;

  static DiffusionProfile1D isotropic() { return {1.0, 1.0, 2.2}; }
  /// Coefficient 1 + a * chi_[gamma, pi].
  static DiffusionProfile1D jump(double a, double gamma) { return {1.0, 1.0 + a, gamma}; }
};

/// P1 stiffness and row-sum lumped mass on [0, pi] with homogeneous Dirichlet
/// conditions at both ends.
DiscreteOperator assemble_1d(const DiffusionProfile1D& coeff, int n_el);
DiscreteOperator assemble_1d(const DiffusionProfile1D& coeff, const Mesh1D& mesh);

/// Element count used for a target mesh size h on [0, pi].
int elements_for_mesh_size(double h);

/// P1 Dirichlet Laplacian on the L-shaped domain.
DiscreteOperator assemble_2d_lshape(double h);

MeshFunction apply(const DiscreteOperator& op, const MeshFunction& v);
double inner_m(const DiscreteOperator& op, const MeshFunction& x, const MeshFunction& y);
double norm_m(const DiscreteOperator& op, const MeshFunction& x);
std::complex<double> inner_m(const DiscreteOperator& op, const ComplexMeshFunction& x,
                             const ComplexMeshFunction& y);

/// Certified enclosure: Gershgorin for the lower end, converged inverse
/// iteration with a 10% margin toward zero for the upper end.
SpectralBounds spectral_bounds(const DiscreteOperator& op);

/// Factorization of (zM + K) for one shift z, realising (z - A)^{-1}.
class ShiftedSolver {
 public:
  ShiftedSolver(const DiscreteOperator& op, std::complex<double> z);

  std::complex<double> shift() const { return shift_; }
  ComplexMeshFunction solve(const MeshFunction& v) const;
  ComplexMeshFunction solve(const ComplexMeshFunction& v) const;

 private:
  const DiscreteOperator* op_;
  std::complex<double> shift_;
  ComplexSparseMatrix system_;
  Eigen::SparseLU<ComplexSparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

/// Returns x with (z - A) x = v. Throws NearSingularShift when z is within
/// 1e-12 |lambda_min_hat| of the spectral enclosure and SolverBreakdown when
/// the residual bound cannot be met.
ComplexMeshFunction solve_shifted(const DiscreteOperator& op, std::complex<double> z,
                                  const MeshFunction& v);

/// Distance from z to the real interval [bounds.lower, bounds.upper].
double distance_to_spectrum(const SpectralBounds& bounds, std::complex<double> z);

/// Factorizations keyed by shift, shared across right-hand sides.
class ShiftedSolveCache {
 public:
  explicit ShiftedSolveCache(const DiscreteOperator& op) : op_(&op) {}
  std::shared_ptr<const ShiftedSolver> get(std::complex<double> z);
  std::size_t size() const;
  void clear();

 private:
  struct Less {
    bool operator()(const std::complex<double>& a, const std::complex<double>& b) const {
      return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    }
  };
  const DiscreteOperator* op_;
  mutable std::mutex mutex_;
  std::map<std::complex<double>, std::shared_ptr<const ShiftedSolver>, Less> solvers_;
};

}  // namespace parctl
