#include "parctl/discrete_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

void check_dim(const DiscreteOperator& op, Eigen::Index n, const char* what) {
  if (n != op.dim()) {
    std::ostringstream msg;
    msg << what << ": vector length " << n << " does not match operator dimension " << op.dim();
    throw DimensionMismatch(msg.str());
  }
}

}  // namespace

Point2 OperatorGeometry::dof_point(int dof) const {
  const int v = dof_to_vertex.at(dof);
  if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) return {m1->nodes[v], 0.0};
  return std::get<MeshLShape>(mesh).vertices[v];
}

DiscreteOperator::DiscreteOperator(SparseMatrix stiffness, Eigen::VectorXd lumped_mass,
                                   std::shared_ptr<const OperatorGeometry> geometry)
    : stiffness_(std::move(stiffness)), mass_(std::move(lumped_mass)), geometry_(std::move(geometry)) {
  if (stiffness_.rows() != stiffness_.cols() || stiffness_.rows() != mass_.size()) {
    throw DimensionMismatch("DiscreteOperator: stiffness and mass sizes differ");
  }
  if (mass_.size() == 0) throw InvalidArgument("DiscreteOperator: empty operator");
  if ((mass_.array() <= 0.0).any()) throw InvalidArgument("DiscreteOperator: non-positive lumped mass");
  stiffness_.makeCompressed();
  bounds_ = spectral_bounds(*this);
}

DiscreteOperator DiscreteOperator::with_stiffness(SparseMatrix stiffness) const {
  return DiscreteOperator(std::move(stiffness), mass_, geometry_);
}

int elements_for_mesh_size(double h) {
  if (!(h > 0.0)) throw InvalidArgument("mesh size must be positive");
  return static_cast<int>(std::ceil(std::numbers::pi / h - 1e-9));
}

DiscreteOperator assemble_1d(const DiffusionProfile1D& coeff, int n_el) {
  if (n_el < 2) throw InvalidArgument("assemble_1d: need at least two elements");
  return assemble_1d(coeff, Mesh1D::uniform(0.0, std::numbers::pi, n_el));
}

DiscreteOperator assemble_1d(const DiffusionProfile1D& coeff, const Mesh1D& mesh) {
  if (!(coeff.a_left > 0.0) || !(coeff.a_right > 0.0)) {
    throw InvalidArgument("assemble_1d: diffusion coefficient must be positive");
  }
  if (!(coeff.interface > mesh.left && coeff.interface < mesh.right)) {
    throw InvalidArgument("assemble_1d: interface must lie inside the domain");
  }
  if (mesh.n_el() < 2) throw InvalidArgument("assemble_1d: need at least two elements");
  mesh.validate();

  const auto& x = mesh.nodes;
  const int n_nodes = static_cast<int>(x.size());
  const auto snapped = std::min_element(x.begin(), x.end(), [&](double a, double b) {
    return std::abs(a - coeff.interface) < std::abs(b - coeff.interface);
  });
  const int interface_node = static_cast<int>(snapped - x.begin());

  const int n = n_nodes - 2;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(3 * n);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < mesh.n_el(); ++e) {
    const double h = x[e + 1] - x[e];
    const double a = e < interface_node ? coeff.a_left : coeff.a_right;
    const double k = a / h;
    const int dofs[2] = {e - 1, e};  // node i is dof i-1
    const double local[2][2] = {{k, -k}, {-k, k}};
    for (int r = 0; r < 2; ++r) {
      if (dofs[r] < 0 || dofs[r] >= n) continue;
      mass[dofs[r]] += 0.5 * h;
      for (int c = 0; c < 2; ++c) {
        if (dofs[c] < 0 || dofs[c] >= n) continue;
        entries.emplace_back(dofs[r], dofs[c], local[r][c]);
      }
    }
  }
  SparseMatrix stiffness(n, n);
  stiffness.setFromTriplets(entries.begin(), entries.end());

  auto geometry = std::make_shared<OperatorGeometry>();
  geometry->mesh = mesh;
  geometry->vertex_to_dof.assign(n_nodes, -1);
  for (int i = 1; i + 1 < n_nodes; ++i) {
    geometry->vertex_to_dof[i] = i - 1;
    geometry->dof_to_vertex.push_back(i);
  }
  return DiscreteOperator(std::move(stiffness), std::move(mass), std::move(geometry));
}

DiscreteOperator assemble_2d_lshape(double h) {
  MeshLShape mesh = MeshLShape::build(h);

  auto geometry = std::make_shared<OperatorGeometry>();
  geometry->vertex_to_dof.assign(mesh.vertices.size(), -1);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.boundary[v]) continue;
    geometry->vertex_to_dof[v] = static_cast<int>(geometry->dof_to_vertex.size());
    geometry->dof_to_vertex.push_back(static_cast<int>(v));
  }
  const int n = static_cast<int>(geometry->dof_to_vertex.size());
  if (n == 0) throw InvalidArgument("assemble_2d_lshape: mesh has no interior vertices");

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(9 * mesh.triangles.size());
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(static_cast<int>(t));
    // gradients of barycentric coordinates: grad(phi_k) = rot(edge opposite k) / (2 area)
    double gx[3], gy[3];
    for (int k = 0; k < 3; ++k) {
      const Point2& p = mesh.vertices[tri[(k + 1) % 3]];
      const Point2& q = mesh.vertices[tri[(k + 2) % 3]];
      gx[k] = (p[1] - q[1]) / (2.0 * area);
      gy[k] = (q[0] - p[0]) / (2.0 * area);
    }
    for (int r = 0; r < 3; ++r) {
      const int dr = geometry->vertex_to_dof[tri[r]];
      if (dr < 0) continue;
      mass[dr] += area / 3.0;
      for (int c = 0; c < 3; ++c) {
        const int dc = geometry->vertex_to_dof[tri[c]];
        if (dc < 0) continue;
        entries.emplace_back(dr, dc, area * (gx[r] * gx[c] + gy[r] * gy[c]));
      }
    }
  }
  SparseMatrix stiffness(n, n);
  stiffness.setFromTriplets(entries.begin(), entries.end());
  geometry->mesh = std::move(mesh);
  return DiscreteOperator(std::move(stiffness), std::move(mass), std::move(geometry));
}

MeshFunction apply(const DiscreteOperator& op, const MeshFunction& v) {
  check_dim(op, v.size(), "apply");
  return -(op.stiffness() * v).cwiseQuotient(op.mass());
}

double inner_m(const DiscreteOperator& op, const MeshFunction& x, const MeshFunction& y) {
  check_dim(op, x.size(), "inner_m");
  check_dim(op, y.size(), "inner_m");
  return (op.mass().array() * x.array() * y.array()).sum();
}

std::complex<double> inner_m(const DiscreteOperator& op, const ComplexMeshFunction& x,
                             const ComplexMeshFunction& y) {
  check_dim(op, x.size(), "inner_m");
  check_dim(op, y.size(), "inner_m");
  return (op.mass().cast<std::complex<double>>().array() * x.array() * y.conjugate().array()).sum();
}

double norm_m(const DiscreteOperator& op, const MeshFunction& x) {
  return std::sqrt(inner_m(op, x, x));
}

SpectralBounds spectral_bounds(const DiscreteOperator& op) {
  const SparseMatrix& K = op.stiffness();
  const Eigen::VectorXd& M = op.mass();
  const int n = op.dim();

  // Gershgorin on M^{-1} K bounds the most negative eigenvalue of A.
  Eigen::VectorXd row_abs = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < K.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(K, k); it; ++it) row_abs[it.row()] += std::abs(it.value());
  }
  const double radius = (row_abs.array() / M.array()).maxCoeff();

  // Inverse iteration for the smallest generalized eigenvalue of K v = s M v.
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
  if (ldlt.info() != Eigen::Success) throw InvalidArgument("spectral_bounds: stiffness is not positive definite");
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) x[i] += 0.1 * std::sin(1.0 + i);  // avoid symmetry-orthogonal starts
  double rayleigh = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = ldlt.solve(M.cwiseProduct(x));
    y /= std::sqrt(y.dot(M.cwiseProduct(y)));
    const double next = y.dot(K * y);
    const bool converged = it > 3 && std::abs(next - rayleigh) <= 1e-12 * next;
    rayleigh = next;
    x = std::move(y);
    if (converged) break;
  }
  if (!(rayleigh > 0.0)) throw InvalidArgument("spectral_bounds: stiffness is not positive definite");

  SpectralBounds b;
  b.lower = -radius;
  b.upper = std::min(0.0, -0.9 * rayleigh);
  return b;
}

double distance_to_spectrum(const SpectralBounds& bounds, std::complex<double> z) {
  const double re = z.real();
  const double dx = re < bounds.lower ? bounds.lower - re : (re > bounds.upper ? re - bounds.upper : 0.0);
  return std::hypot(dx, z.imag());
}

ShiftedSolver::ShiftedSolver(const DiscreteOperator& op, std::complex<double> z) : op_(&op), shift_(z) {
  const SpectralBounds& b = op.bounds();
  if (!(std::isfinite(z.real()) && std::isfinite(z.imag()))) {
    throw InvalidArgument("solve_shifted: non-finite shift");
  }
  if (distance_to_spectrum(b, z) <= 1e-12 * std::abs(b.lower)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "solve_shifted: shift " << z << " is within the spectral enclosure [" << b.lower << ", "
        << b.upper << "] (near-singular system)";
    throw NearSingularShift(msg.str());
  }
  system_ = op.stiffness().cast<std::complex<double>>();
  for (int i = 0; i < op.dim(); ++i) system_.coeffRef(i, i) += z * op.mass()[i];
  system_.makeCompressed();
  lu_.analyzePattern(system_);
  lu_.factorize(system_);
  if (lu_.info() != Eigen::Success) {
    throw SolverBreakdown("solve_shifted: sparse LU factorization failed", std::numeric_limits<double>::infinity());
  }
}

ComplexMeshFunction ShiftedSolver::solve(const MeshFunction& v) const {
  return solve(ComplexMeshFunction(v.cast<std::complex<double>>()));
}

ComplexMeshFunction ShiftedSolver::solve(const ComplexMeshFunction& v) const {
  check_dim(*op_, v.size(), "solve_shifted");
  const ComplexMeshFunction rhs = op_->mass().cast<std::complex<double>>().cwiseProduct(v);
  const double rhs_norm = rhs.norm();
  ComplexMeshFunction x = lu_.solve(rhs);
  double residual = (rhs - system_ * x).norm();
  for (int refine = 0; refine < 3 && residual > 1e-12 * rhs_norm; ++refine) {
    x += lu_.solve(ComplexMeshFunction(rhs - system_ * x));
    residual = (rhs - system_ * x).norm();
  }
  if (!(residual <= 1e-12 * rhs_norm) && rhs_norm > 0.0) {
    std::ostringstream msg;
    msg << "solve_shifted: residual " << residual << " exceeds 1e-12 * " << rhs_norm << " at shift " << shift_;
    throw SolverBreakdown(msg.str(), residual);
  }
  return x;
}

ComplexMeshFunction solve_shifted(const DiscreteOperator& op, std::complex<double> z, const MeshFunction& v) {
  check_dim(op, v.size(), "solve_shifted");
  return ShiftedSolver(op, z).solve(v);
}

std::shared_ptr<const ShiftedSolver> ShiftedSolveCache::get(std::complex<double> z) {
  {
    std::lock_guard lock(mutex_);
    auto it = solvers_.find(z);
    if (it != solvers_.end()) return it->second;
  }
  auto solver = std::make_shared<const ShiftedSolver>(*op_, z);
  std::lock_guard lock(mutex_);
  return solvers_.emplace(z, std::move(solver)).first->second;
}

std::size_t ShiftedSolveCache::size() const {
  std::lock_guard lock(mutex_);
  return solvers_.size();
}

void ShiftedSolveCache::clear() {
  std::lock_guard lock(mutex_);
  solvers_.clear();
}

}  // namespace parctl
