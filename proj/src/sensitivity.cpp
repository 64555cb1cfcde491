#include "parctl/sensitivity.hpp"

#include <ostream>
#include <random>

#include "parctl/errors.hpp"

namespace parctl {

namespace {

MeshFunction unit_direction(const DiscreteOperator& op, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MeshFunction d(op.dim());
  for (int i = 0; i < op.dim(); ++i) d[i] = u(rng);
  return d / norm_m(op, d);
}

}  // namespace

std::string channel_name(Channel c) {
  switch (c) {
    case Channel::alpha: return "alpha";
    case Channel::beta: return "beta";
    case Channel::w: return "w";
    case Channel::ystar: return "ystar";
    case Channel::f: return "f";
    case Channel::op: return "operator";
    case Channel::diffusion: return "diffusion";
  }
  return "unknown";
}

Channel parse_channel(const std::string& name) {
  for (Channel c : all_channels())
    if (channel_name(c) == name) return c;
  throw InvalidArgument("unknown perturbation channel '" + name + "'");
}

const std::vector<Channel>& all_channels() {
  static const std::vector<Channel> channels{Channel::alpha, Channel::beta, Channel::w,        Channel::ystar,
                                             Channel::f,     Channel::op,   Channel::diffusion};
  return channels;
}

PerturbedProblem perturb(const ProblemSpec& spec, const DiscreteOperator& op, const PerturbationSpec& p) {
  if (!(p.nu >= 0 && p.nu < 1)) throw InvalidArgument("perturb: nu must lie in [0, 1)");
  PerturbedProblem out{spec, op};
  if (p.nu == 0) return out;
  std::mt19937_64 rng(p.seed);
  const int n = op.dim();
  switch (p.channel) {
    case Channel::alpha:
      out.spec.alpha = spec.alpha * (1.0 + p.nu);
      break;
    case Channel::beta: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Eigen::VectorXd d(spec.segments.size());
      for (auto& x : d) x = u(rng);
      d.normalize();
      for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        out.spec.segments[i].beta = std::max(0.0, spec.segments[i].beta + p.nu * d[static_cast<int>(i)]);
      }
      break;
    }
    case Channel::w:
      for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        out.spec.segments[i].w = spec.w_of(i, n) + p.nu * unit_direction(op, rng);
      }
      break;
    case Channel::f:
      for (std::size_t i = 0; i < spec.segments.size(); ++i) {
        out.spec.segments[i].f = spec.f_of(i, n) + p.nu * unit_direction(op, rng);
      }
      break;
    case Channel::ystar: {
      MeshFunction d = unit_direction(op, rng);
      if (p.orthogonal) {
        const double yy = inner_m(op, spec.ystar, spec.ystar);
        if (yy > 0) d -= inner_m(op, d, spec.ystar) / yy * spec.ystar;
        d /= norm_m(op, d);
      }
      out.spec.ystar = spec.ystar + p.nu * d;
      break;
    }
    case Channel::op: {
      // A + nu D with A = -M^{-1} K, i.e. K - nu M D
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      SparseMatrix k = op.stiffness();
      for (int i = 0; i < n; ++i) k.coeffRef(i, i) -= p.nu * op.mass()[i] * u(rng);
      out.op = op.with_stiffness(std::move(k));
      break;
    }
    case Channel::diffusion:
      out.op = op.with_stiffness((1.0 + p.nu) * op.stiffness());
      break;
  }
  return out;
}

std::vector<SensitivityRow> sensitivity_sweep(const ProblemSpec& spec, const DiscreteOperator& op, Channel channel,
                                              const std::vector<double>& nus, std::uint64_t seed, double eps,
                                              bool orthogonal) {
  ControlSolver base(op, homogenize(spec, op));
  const double mu = base.solve_mu(eps);
  const MeshFunction u = base.optimal_control(mu);
  const double phi0 = base.phi(0.0);
  std::vector<SensitivityRow> rows;
  for (double nu : nus) {
    SensitivityRow row;
    row.channel = channel;
    row.nu = nu;
    row.mu_eps = mu;
    row.phi0 = phi0;
    try {
      const PerturbedProblem pp = perturb(spec, op, {nu, channel, seed, orthogonal});
      ControlSolver solver(pp.op, homogenize(pp.spec, pp.op));
      row.mu_eps_delta = solver.solve_mu(eps);
      row.phi0_delta = solver.phi(0.0);
      row.drift = norm_m(op, solver.optimal_control(row.mu_eps_delta) - u);
      row.ratio = nu > 0 ? row.drift / nu : 0.0;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sensitivity_csv(std::ostream& os, const std::vector<SensitivityRow>& rows, bool header) {
  if (header) os << "channel,nu,drift,ratio,mu_eps,mu_eps_delta,status\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    os << channel_name(r.channel) << ',' << r.nu << ',' << r.drift << ',' << r.ratio << ',' << r.mu_eps << ','
       << r.mu_eps_delta << ',' << (r.ok ? "ok" : "failed") << '\n';
  }
  os.precision(old);
}

}  // namespace parctl
