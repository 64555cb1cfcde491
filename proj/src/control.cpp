#include "parctl/control.hpp"

#include <cmath>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

[[noreturn]] void fit_failed(const std::string& what, const std::vector<FitReport>& reports) {
  std::ostringstream msg;
  msg << what << ": rational fit did not reach tolerance " << kOperatorFitTol << " (";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    msg << (i ? ", " : "") << "relative error " << static_cast<double>(reports[i].relative_error()) << " at degree "
        << reports[i].degree;
  }
  msg << ")";
  throw Error("fit_failure", msg.str());
}

SetFitResult fit_or_throw(const std::vector<SymbolExpr>& gs, const char* what) {
  SetFitResult fit = fit_rational_set(gs, kMaxFitDegree, kOperatorFitTol);
  if (!fit.success()) fit_failed(what, fit.reports);
  return fit;
}

}  // namespace

MeshFunction source_response(const ProblemSpec& spec, const DiscreteOperator& op, double t, ShiftedSolveCache* cache) {
  MeshFunction out = MeshFunction::Zero(op.dim());
  for (std::size_t j = 0; j < spec.segments.size(); ++j) {
    const auto& s = spec.segments[j];
    if (s.begin >= t || s.f.size() == 0 || s.f.isZero(0.0)) continue;
    const SymbolExpr g = SymbolExpr::segment_integral(std::max(0.0, t - s.end), t - s.begin, 1);
    out += apply_symbol(op, g, s.f, cache);
  }
  return out;
}

HomogenizedData homogenize(const ProblemSpec& spec, const DiscreteOperator& op) {
  spec.validate(op.dim());
  const int n = op.dim();
  HomogenizedData hd;
  hd.horizon = spec.horizon;
  hd.alpha = spec.alpha;
  const bool source = spec.has_source();
  hd.ystar_hom = source ? MeshFunction(spec.ystar - source_response(spec, op, spec.horizon)) : spec.ystar;
  SymbolExpr symbol = SymbolExpr::constant(spec.alpha);
  hd.psi = MeshFunction::Zero(n);
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& s = spec.segments[i];
    MeshFunction w = spec.w_of(i, n);
    if (source) w -= source_response(spec, op, 0.5 * (s.begin + s.end));
    if (s.beta > 0) {
      symbol = symbol + s.beta * SymbolExpr::segment_integral(s.begin, s.end, 2);
      if (!w.isZero(0.0)) hd.psi += s.beta * apply_symbol(op, SymbolExpr::segment_integral(s.begin, s.end, 1), w);
    }
    hd.w_hom.push_back(std::move(w));
  }
  hd.psi_symbol = symbol;
  return hd;
}

std::vector<MeshFunction> trajectory(const ProblemSpec& spec, const DiscreteOperator& op, const MeshFunction& u,
                                     const std::vector<double>& times) {
  if (u.size() != op.dim()) throw DimensionMismatch("trajectory: control has wrong length");
  std::vector<MeshFunction> out;
  for (double t : times) {
    if (!(t >= 0 && t <= spec.horizon * (1 + 1e-14))) throw InvalidArgument("trajectory: time outside [0, T]");
    MeshFunction y = semigroup_apply(op, t, u);
    if (spec.has_source()) y += source_response(spec, op, t);
    out.push_back(std::move(y));
  }
  return out;
}

double cost_J(const ProblemSpec& spec, const DiscreteOperator& op, const MeshFunction& u) {
  if (u.size() != op.dim()) throw DimensionMismatch("cost_J: control has wrong length");
  double j = 0.5 * spec.alpha * inner_m(op, u, u);
  for (std::size_t i = 0; i < spec.segments.size(); ++i) {
    const auto& s = spec.segments[i];
    if (s.beta == 0) continue;
    const MeshFunction w = spec.w_of(i, op.dim());
    auto integrand = [&](double t) {
      const MeshFunction y = trajectory(spec, op, u, {t}).front();
      const MeshFunction d = y - w;
      return inner_m(op, d, d);
    };
    j += 0.5 * s.beta * boost::math::quadrature::gauss<double, 8>::integrate(integrand, s.begin, s.end);
  }
  return j;
}

ControlSolver::ControlSolver(const DiscreteOperator& op, HomogenizedData data) : op_(&op), data_(std::move(data)) {
  if (data_.ystar_hom.size() != op.dim() || data_.psi.size() != op.dim()) {
    throw DimensionMismatch("ControlSolver: data does not match the operator dimension");
  }
}

SymbolExpr ControlSolver::denominator(double mu) const {
  if (mu == 0) return data_.psi_symbol;
  return mu * SymbolExpr::exp(2 * data_.horizon) + data_.psi_symbol;
}

MeshFunction ControlSolver::u_min() {
  {
    std::lock_guard lock(mutex_);
    if (u_min_.size() > 0) return u_min_;
  }
  MeshFunction u = data_.psi.isZero(0.0) ? MeshFunction::Zero(op_->dim())
                                         : apply_symbol(*op_, SymbolExpr::constant(1) / data_.psi_symbol, data_.psi);
  std::lock_guard lock(mutex_);
  u_min_ = u;
  return u;
}

double ControlSolver::phi(double mu) {
  if (!(mu >= 0) || !std::isfinite(mu)) throw InvalidArgument("phi: mu must be finite and >= 0");
  {
    std::lock_guard lock(mutex_);
    if (auto it = phi_cache_.find(mu); it != phi_cache_.end()) return it->second;
  }
  const MeshFunction& y = data_.ystar_hom;
  double value = 0.0;
  if (!y.isZero(0.0) || !data_.psi.isZero(0.0)) {
    const SymbolExpr d = denominator(mu);
    const SymbolExpr h = SymbolExpr::exp(data_.horizon) / d;
    ShiftedSolveCache solves(*op_);
    MeshFunction x;
    if (mu == 0) {
      const SetFitResult fit = fit_or_throw({h}, "phi");
      x = apply_rational(*op_, fit.rationals[0], data_.psi, &solves);
    } else {
      const SymbolExpr g = mu * SymbolExpr::exp(2 * data_.horizon) / d;
      const SetFitResult fit = fit_or_throw({g, h}, "phi");
      x = apply_rational(*op_, fit.rationals[0], y, &solves) + apply_rational(*op_, fit.rationals[1], data_.psi, &solves);
    }
    value = norm_m(*op_, y - x);
  }
  std::lock_guard lock(mutex_);
  ++phi_evaluations_;
  phi_cache_.emplace(mu, value);
  return value;
}

double ControlSolver::solve_mu(double eps) {
  if (!(eps > 0)) throw InvalidArgument("solve_mu: eps must be positive");
  const double phi0 = phi(0.0);
  if (eps >= phi0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (phi(hi) >= eps) {
    lo = hi;
    hi *= 10.0;
    if (hi > 1e30) {
      throw Error("bracket_failure", "solve_mu: Phi(mu) stays above eps for mu up to 1e30; Phi is not decaying");
    }
  }
  auto f = [&](double mu) { return phi(mu) - eps; };
  std::uintmax_t max_iter = 200;
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::min(std::abs(a), std::abs(b)); };
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, max_iter);
  // the endpoint with the smaller residual
  return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

MeshFunction ControlSolver::optimal_control(double mu) {
  if (!(mu >= 0) || !std::isfinite(mu)) throw InvalidArgument("optimal_control: mu must be finite and >= 0");
  if (mu == 0) return u_min();
  const SymbolExpr d = denominator(mu);
  const SymbolExpr a = mu * SymbolExpr::exp(data_.horizon) / d;
  const SymbolExpr b = SymbolExpr::constant(1) / d;
  SetFitResult fit = fit_rational_set({a, b}, kMaxFitDegree, kPrecisionFitTol);
  if (!fit.success()) fit = fit_or_throw({a, b}, "optimal_control");
  ShiftedSolveCache solves(*op_);
  MeshFunction u = apply_rational(*op_, fit.rationals[0], data_.ystar_hom, &solves) +
                   apply_rational(*op_, fit.rationals[1], data_.psi, &solves);
  u -= apply_rational(*op_, fit.rationals[1], stationarity_residual(u, mu), &solves);
  return u;
}

MeshFunction ControlSolver::stationarity_residual(const MeshFunction& u, double mu) const {
  MeshFunction r = apply_rational(*op_, precise_fit(data_.psi_symbol).rational, u) - data_.psi;
  if (mu != 0) {
    const PartialFractionRational& s = precise_fit(SymbolExpr::exp(data_.horizon)).rational;
    ShiftedSolveCache solves(*op_);
    const MeshFunction miss = apply_rational(*op_, s, u, &solves) - data_.ystar_hom;
    r += mu * apply_rational(*op_, s, miss, &solves);
  }
  return r;
}

double ControlSolver::kkt_residual(const MeshFunction& u, double mu) {
  if (u.size() != op_->dim()) throw DimensionMismatch("kkt_residual: control has wrong length");
  return norm_m(*op_, stationarity_residual(u, mu)) / std::max(1.0, norm_m(*op_, data_.psi));
}

std::vector<std::pair<double, double>> ControlSolver::phi_curve(const std::vector<double>& mus, int threads) {
  std::vector<std::pair<double, double>> out(mus.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(mus.size())));
  auto work = [&](int id) {
    for (std::size_t i = id; i < mus.size(); i += workers) out[i] = {mus[i], phi(mus[i])};
  };
  if (workers == 1) {
    work(0);
    return out;
  }
  std::vector<std::jthread> pool;
  for (int id = 0; id < workers; ++id) pool.emplace_back(work, id);
  pool.clear();
  return out;
}

ControlSolution ControlSolver::solve(const ProblemSpec& spec, double eps) {
  ControlSolution s;
  s.epsilon = eps;
  s.phi0 = phi(0.0);
  s.mu = solve_mu(eps);
  s.u = optimal_control(s.mu);
  s.y_final = trajectory(spec, *op_, s.u, {spec.horizon}).front();
  s.miss = norm_m(*op_, s.y_final - spec.ystar);
  s.cost = cost_J(spec, *op_, s.u);
  s.kkt = kkt_residual(s.u, s.mu);
  return s;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0 && hi > lo) || n < 2) throw InvalidArgument("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace parctl
