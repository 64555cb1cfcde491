#include "parctl/oracle.hpp"

#include <cmath>
#include <sstream>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

Eigen::VectorXd symbol_values(const DenseSpectral& ds, const SymbolExpr& g) {
  Eigen::VectorXd out(ds.dim());
  for (int k = 0; k < ds.dim(); ++k) {
    const long double v = g(ds.eigenvalues[k]);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "oracle: symbol " << g.key() << " is singular at eigenvalue " << ds.eigenvalues[k];
      throw InvalidArgument(msg.str());
    }
    out[k] = static_cast<double>(v);
  }
  return out;
}

// coefficients of int_0^t S_tau f(t - tau) dtau
Eigen::VectorXd source_coefficients(const ProblemSpec& spec, const DenseSpectral& ds, double t) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ds.dim());
  for (const auto& s : spec.segments) {
    if (s.begin >= t || s.f.size() == 0 || s.f.isZero(0.0)) continue;
    const SymbolExpr g = SymbolExpr::segment_integral(std::max(0.0, t - s.end), t - s.begin, 1);
    out += symbol_values(ds, g).cwiseProduct(ds.coefficients(s.f));
  }
  return out;
}

}  // namespace

Eigen::VectorXd DenseSpectral::coefficients(const MeshFunction& v) const {
  if (v.size() != dim()) throw DimensionMismatch("oracle: vector length differs from operator dimension");
  return vectors.transpose() * mass.cwiseProduct(v);
}

MeshFunction DenseSpectral::synthesize(const Eigen::VectorXd& c) const { return vectors * c; }

DenseSpectral decompose(const DiscreteOperator& op) {
  if (op.dim() > kOracleMaxDim) {
    std::ostringstream msg;
    msg << "decompose: dimension " << op.dim() << " exceeds the dense oracle limit " << kOracleMaxDim;
    throw InvalidArgument(msg.str());
  }
  const Eigen::MatrixXd k = Eigen::MatrixXd(op.stiffness());
  const Eigen::MatrixXd m = op.mass().asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  if (es.info() != Eigen::Success) throw SolverBreakdown("decompose: dense eigensolver failed", 0.0);
  // K v = kappa M v with kappa ascending; A = -M^{-1} K has eigenvalue -kappa
  const int n = op.dim();
  DenseSpectral ds;
  ds.mass = op.mass();
  ds.eigenvalues.resize(n);
  ds.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    ds.eigenvalues[i] = -es.eigenvalues()[n - 1 - i];
    ds.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return ds;
}

MeshFunction oracle_apply(const DenseSpectral& ds, const SymbolExpr& g, const MeshFunction& v) {
  return ds.synthesize(symbol_values(ds, g).cwiseProduct(ds.coefficients(v)));
}

OracleControl::OracleControl(const ProblemSpec& spec, const DiscreteOperator& op) : spec_(spec), ds_(decompose(op)) {
  spec.validate(op.dim());
  const int n = op.dim();
  const bool source = spec.has_source();
  source_T_ = source ? source_coefficients(spec, ds_, spec.horizon) : Eigen::VectorXd::Zero(n);
  y_ = ds_.coefficients(spec.ystar) - source_T_;
  psi_ = Eigen::VectorXd::Zero(n);
  psi_symbol_ = Eigen::VectorXd::Constant(n, spec.alpha);
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& s = spec.segments[i];
    Eigen::VectorXd w = ds_.coefficients(spec.w_of(i, n));
    if (source) w -= source_coefficients(spec, ds_, 0.5 * (s.begin + s.end));
    if (s.beta > 0) {
      psi_symbol_ += s.beta * symbol_values(ds_, SymbolExpr::segment_integral(s.begin, s.end, 2));
      psi_ += s.beta * symbol_values(ds_, SymbolExpr::segment_integral(s.begin, s.end, 1)).cwiseProduct(w);
    }
    w_hom_.push_back(std::move(w));
  }
}

double OracleControl::phi(double mu) const {
  // y - (mu e^{2T} y + e^{T} psi) / D = (Psi y - e^{T} psi) / D per eigencomponent
  const long double t = spec_.horizon;
  long double s = 0;
  for (int k = 0; k < ds_.dim(); ++k) {
    const long double lam = ds_.eigenvalues[k];
    const long double e1 = std::exp(t * lam), e2 = std::exp(2 * t * lam);
    const long double d = mu * e2 + psi_symbol_[k];
    const long double r = (psi_symbol_[k] * static_cast<long double>(y_[k]) - e1 * psi_[k]) / d;
    s += r * r;
  }
  return static_cast<double>(std::sqrt(s));
}

double OracleControl::solve_mu(double eps) const {
  if (!(eps > 0)) throw InvalidArgument("oracle solve_mu: eps must be positive");
  if (eps >= phi(0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (phi(hi) >= eps) {
    lo = hi;
    hi *= 10.0;
    if (hi > 1e30) throw Error("bracket_failure", "oracle solve_mu: Phi does not fall below eps");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (phi(mid) >= eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

MeshFunction OracleControl::control(double mu) const {
  Eigen::VectorXd c(ds_.dim());
  for (int k = 0; k < ds_.dim(); ++k) {
    const double lam = ds_.eigenvalues[k];
    const double t = spec_.horizon;
    c[k] = (mu * std::exp(t * lam) * y_[k] + psi_[k]) / (mu * std::exp(2 * t * lam) + psi_symbol_[k]);
  }
  return ds_.synthesize(c);
}

MeshFunction OracleControl::final_state(const MeshFunction& u) const {
  const Eigen::VectorXd c = ds_.coefficients(u);
  Eigen::VectorXd y(ds_.dim());
  for (int k = 0; k < ds_.dim(); ++k) y[k] = std::exp(spec_.horizon * ds_.eigenvalues[k]) * c[k] + source_T_[k];
  return ds_.synthesize(y);
}

double OracleControl::cost(const MeshFunction& u) const {
  // y(t) - w = S_t u - w_hom on each segment; exact time integrals per eigencomponent
  const Eigen::VectorXd c = ds_.coefficients(u);
  double j = 0.5 * spec_.alpha * c.squaredNorm();
  for (std::size_t i = 0; i < spec_.segments.size(); ++i) {
    const auto& s = spec_.segments[i];
    if (s.beta == 0) continue;
    const Eigen::VectorXd i2 = symbol_values(ds_, SymbolExpr::segment_integral(s.begin, s.end, 2));
    const Eigen::VectorXd i1 = symbol_values(ds_, SymbolExpr::segment_integral(s.begin, s.end, 1));
    const Eigen::VectorXd& w = w_hom_[i];
    double seg = 0.0;
    for (int k = 0; k < ds_.dim(); ++k) seg += c[k] * c[k] * i2[k] - 2 * c[k] * w[k] * i1[k] + w[k] * w[k] * s.length();
    j += 0.5 * s.beta * seg;
  }
  return j;
}

double OracleControl::kkt_residual(const MeshFunction& u, double mu) const {
  const Eigen::VectorXd c = ds_.coefficients(u);
  Eigen::VectorXd r(ds_.dim());
  for (int k = 0; k < ds_.dim(); ++k) {
    const double lam = ds_.eigenvalues[k];
    const double t = spec_.horizon;
    r[k] = psi_symbol_[k] * c[k] - psi_[k] + mu * (std::exp(2 * t * lam) * c[k] - std::exp(t * lam) * y_[k]);
  }
  return r.norm() / std::max(1.0, psi_.norm());
}

ControlSolution OracleControl::solve(double eps) const {
  ControlSolution s;
  s.epsilon = eps;
  s.phi0 = phi(0.0);
  s.mu = solve_mu(eps);
  s.u = control(s.mu);
  s.y_final = final_state(s.u);
  const Eigen::VectorXd d = ds_.coefficients(s.y_final - spec_.ystar);
  s.miss = d.norm();
  s.cost = cost(s.u);
  s.kkt = kkt_residual(s.u, s.mu);
  return s;
}

ControlSolution oracle_solve_control(const ProblemSpec& spec, const DiscreteOperator& op) {
  return OracleControl(spec, op).solve(spec.epsilon);
}

}  // namespace parctl
