#include "parctl/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "parctl/errors.hpp"
#include "parctl/oracle.hpp"

namespace parctl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

nlohmann::json config_json(const RunConfig& c) {
  return {
      {"name", c.name},
      {"mesh", {{"dimension", c.dimension}, {"h", c.h}, {"n_el", c.n_el}, {"diffusion_jump", c.diffusion_jump},
                {"interface", c.interface}}},
      {"problem", {{"T", c.horizon}, {"alpha", c.alpha}, {"beta", c.beta},
                   {"beta_window", {c.beta_begin, c.beta_end}}, {"w", c.w}, {"ystar", c.ystar}, {"f", c.f},
                   {"eps_fractions", c.eps_fractions}}},
      {"phi_curve", {{"points", c.phi_points}, {"mu_min", c.phi_mu_min}, {"mu_max", c.phi_mu_max}}},
      {"sensitivity", {{"nus", c.nus}, {"eps_fraction", c.sensitivity_eps_fraction}, {"channels", c.channels}}},
      {"convergence", {{"fit_degrees", c.fit_degrees}, {"contour_counts", c.contour_counts},
                       {"refinements", c.refinements}, {"refinement_h", c.refinement_h}}},
      {"run", {{"seed", c.seed}, {"threads", c.threads}}},
  };
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& file) {
  std::filesystem::create_directories(cfg.output_dir);
  return std::filesystem::path(cfg.output_dir) / file;
}

std::ofstream open_csv(const RunConfig& cfg, const std::string& file) {
  const auto path = output_path(cfg, file);
  std::ofstream os(path);
  if (!os) throw Error("io_error", "cannot write " + path.string());
  os.precision(17);
  return os;
}

void write_sidecar(const RunConfig& cfg, const std::string& file, nlohmann::json extra) {
  extra["config"] = config_json(cfg);
  extra["artifact"] = file;
  const auto path = output_path(cfg, file + ".json");
  std::ofstream os(path);
  if (!os) throw Error("io_error", "cannot write " + path.string());
  os << extra.dump(2) << '\n';
}

int mesh_elements(const RunConfig& cfg) { return cfg.n_el > 0 ? cfg.n_el : elements_for_mesh_size(cfg.h); }

DiffusionProfile1D profile(const RunConfig& cfg) { return DiffusionProfile1D::jump(cfg.diffusion_jump, cfg.interface); }

ProblemSpec make_problem(const RunConfig& cfg, const MeshFunction& w, const MeshFunction& ystar, const MeshFunction& f) {
  ProblemSpec spec;
  spec.horizon = cfg.horizon;
  spec.alpha = cfg.alpha;
  spec.ystar = ystar;
  spec.epsilon = 1.0;
  spec.segments = window_segments(cfg.horizon, cfg.beta_begin * cfg.horizon, cfg.beta_end * cfg.horizon, cfg.beta,
                                  w, f.isZero(0.0) ? MeshFunction() : f);
  return spec;
}

double phi0_of(const ProblemSpec& spec, const DiscreteOperator& op) {
  ControlSolver solver(op, homogenize(spec, op));
  return solver.phi(0.0);
}

}  // namespace

DiscreteOperator build_operator(const RunConfig& cfg) {
  if (cfg.dimension == 2) return assemble_2d_lshape(cfg.h);
  return assemble_1d(profile(cfg), mesh_elements(cfg));
}

MeshFunction project_field(const DiscreteOperator& op, const std::string& descriptor) {
  const FieldDescriptor d = parse_descriptor(descriptor);
  if (const auto* s = std::get_if<SampledValues>(&d); s && s->values.size() == 0) return MeshFunction::Zero(op.dim());
  return project_to_mesh(op, d);
}

ProblemSpec build_problem(const RunConfig& cfg, const DiscreteOperator& op) {
  return make_problem(cfg, project_field(op, cfg.w), project_field(op, cfg.ystar), project_field(op, cfg.f));
}

ExampleResult run_example(const RunConfig& cfg, bool with_phi_curve, bool write, std::ostream* log) {
  const DiscreteOperator op = build_operator(cfg);
  ProblemSpec spec = build_problem(cfg, op);
  ExampleResult res;
  auto t0 = Clock::now();
  ControlSolver solver(op, homogenize(spec, op));
  res.phi0 = solver.phi(0.0);
  res.phi0_seconds = seconds_since(t0);
  res.u_min = solver.u_min();
  if (log) *log << "dim " << op.dim() << "  Phi(0) = " << res.phi0 << "  (" << res.phi0_seconds << " s)\n";

  const double umin_norm = norm_m(op, res.u_min);
  const double half = 0.5 * cfg.horizon;
  std::vector<MeshFunction> mids;
  L1BallIndicator ball;
  const FieldDescriptor wdesc = parse_descriptor(cfg.w);
  const bool has_ball = std::holds_alternative<L1BallIndicator>(wdesc);
  if (has_ball) ball = std::get<L1BallIndicator>(wdesc);
  for (double frac : cfg.eps_fractions) {
    EpsilonResult r;
    r.fraction = frac;
    t0 = Clock::now();
    spec.epsilon = frac * res.phi0;
    r.solution = solver.solve(spec, spec.epsilon);
    r.seconds = seconds_since(t0);
    r.rel_distance_to_umin = umin_norm > 0 ? norm_m(op, r.solution.u - res.u_min) / umin_norm : 0.0;
    mids.push_back(trajectory(spec, op, r.solution.u, {half}).front());
    if (has_ball && op.geometry().spatial_dim() == 2) r.mass_fraction_mid = mass_fraction_inside(op, mids.back(), ball);
    if (log) {
      *log << "eps = " << frac << " Phi(0): mu = " << r.solution.mu << "  miss = " << r.solution.miss
           << "  J = " << r.solution.cost << "  kkt = " << r.solution.kkt << "  |u-umin|/|umin| = "
           << r.rel_distance_to_umin << "  (" << r.seconds << " s)\n";
    }
    res.runs.push_back(std::move(r));
  }
  if (with_phi_curve) {
    t0 = Clock::now();
    res.phi_curve = solver.phi_curve(log_grid(cfg.phi_mu_min, cfg.phi_mu_max, cfg.phi_points), cfg.threads);
    res.phi_curve_seconds = seconds_since(t0);
    if (log) *log << "Phi curve: " << res.phi_curve.size() << " samples (" << res.phi_curve_seconds << " s)\n";
  }
  if (!write) return res;

  {
    auto os = open_csv(cfg, "summary.csv");
    os << "eps_fraction,eps,mu,phi0,miss,feasibility_gap,cost,kkt,rel_distance_to_umin,mass_fraction_mid\n";
    for (const auto& r : res.runs) {
      const auto& s = r.solution;
      os << r.fraction << ',' << s.epsilon << ',' << s.mu << ',' << res.phi0 << ',' << s.miss << ','
         << s.miss - s.epsilon << ',' << s.cost << ',' << s.kkt << ',' << r.rel_distance_to_umin << ','
         << r.mass_fraction_mid << '\n';
    }
  }
  {
    auto os = open_csv(cfg, "snapshots.csv");
    const bool two_d = op.geometry().spatial_dim() == 2;
    os << (two_d ? "dof,x,y" : "dof,x") << ",w,ystar,u_min";
    for (const auto& r : res.runs) os << ",u_" << r.fraction << ",y_half_" << r.fraction << ",y_T_" << r.fraction;
    os << '\n';
    const MeshFunction w = spec.w_of(1, op.dim());
    for (int i = 0; i < op.dim(); ++i) {
      const Point2 p = op.geometry().dof_point(i);
      os << i << ',' << p[0];
      if (two_d) os << ',' << p[1];
      os << ',' << w[i] << ',' << spec.ystar[i] << ',' << res.u_min[i];
      for (std::size_t k = 0; k < res.runs.size(); ++k) {
        os << ',' << res.runs[k].solution.u[i] << ',' << mids[k][i] << ',' << res.runs[k].solution.y_final[i];
      }
      os << '\n';
    }
  }
  nlohmann::json meta{{"dimension", op.dim()}, {"phi0", res.phi0}, {"timing_seconds", {{"phi0", res.phi0_seconds}}}};
  for (const auto& r : res.runs) meta["timing_seconds"]["solve_eps_" + std::to_string(r.fraction)] = r.seconds;
  write_sidecar(cfg, "summary.csv", meta);
  write_sidecar(cfg, "snapshots.csv", {{"dimension", op.dim()}});
  if (with_phi_curve) {
    auto os = open_csv(cfg, "phi_curve.csv");
    os << "mu,phi\n";
    for (const auto& [mu, v] : res.phi_curve) os << mu << ',' << v << '\n';
    write_sidecar(cfg, "phi_curve.csv", {{"phi0", res.phi0}, {"timing_seconds", res.phi_curve_seconds}});
  }
  return res;
}

PhiCurveResult run_phi_curve(const RunConfig& cfg, bool write, std::ostream* log) {
  const DiscreteOperator op = build_operator(cfg);
  const ProblemSpec spec = build_problem(cfg, op);
  ControlSolver solver(op, homogenize(spec, op));
  PhiCurveResult res;
  const auto t0 = Clock::now();
  res.phi0 = solver.phi(0.0);
  res.samples = solver.phi_curve(log_grid(cfg.phi_mu_min, cfg.phi_mu_max, cfg.phi_points), cfg.threads);
  res.seconds = seconds_since(t0);
  for (std::size_t i = 1; i < res.samples.size(); ++i)
    if (!(res.samples[i].second < res.samples[i - 1].second)) ++res.violations;
  if (log) {
    *log << res.samples.size() << " samples of Phi in " << res.seconds << " s; Phi(0) = " << res.phi0
         << ", Phi(mu_max) = " << res.samples.back().second << ", monotonicity violations: " << res.violations << '\n';
  }
  if (write) {
    auto os = open_csv(cfg, "phi_curve.csv");
    os << "mu,phi,decreasing\n";
    for (std::size_t i = 0; i < res.samples.size(); ++i) {
      const bool ok = i == 0 || res.samples[i].second < res.samples[i - 1].second;
      os << res.samples[i].first << ',' << res.samples[i].second << ',' << (ok ? 1 : 0) << '\n';
    }
    write_sidecar(cfg, "phi_curve.csv",
                  {{"phi0", res.phi0}, {"violations", res.violations}, {"timing_seconds", res.seconds}});
  }
  return res;
}

std::vector<std::pair<double, double>> refinement_study(const RunConfig& cfg) {
  std::vector<std::pair<double, double>> out;
  const double h0 = cfg.refinement_h > 0 ? cfg.refinement_h : cfg.h;
  if (cfg.dimension == 2) {
    for (int level = 0; level <= cfg.refinements; ++level) {
      RunConfig c = cfg;
      c.h = h0 / (1 << level);
      const DiscreteOperator op = build_operator(c);
      out.emplace_back(c.h, phi0_of(build_problem(c, op), op));
    }
    return out;
  }
  // data fixed as the P1 interpolant on the coarsest mesh, evaluated on nested refinements
  RunConfig coarse_cfg = cfg;
  coarse_cfg.n_el = cfg.refinement_h > 0 ? elements_for_mesh_size(cfg.refinement_h) : mesh_elements(cfg);
  const DiscreteOperator coarse = build_operator(coarse_cfg);
  const Mesh1D& mesh = std::get<Mesh1D>(coarse.geometry().mesh);
  auto as_p1 = [&](const MeshFunction& v) {
    PiecewiseLinear1D p{mesh.nodes, std::vector<double>(mesh.nodes.size(), 0.0)};
    for (int d = 0; d < coarse.dim(); ++d) p.values[coarse.geometry().dof_to_vertex[d]] = v[d];
    return p;
  };
  const auto w = as_p1(project_field(coarse, cfg.w));
  const auto y = as_p1(project_field(coarse, cfg.ystar));
  const auto f = as_p1(project_field(coarse, cfg.f));
  for (int level = 0; level <= cfg.refinements; ++level) {
    const Mesh1D fine = mesh.refined(1 << level);
    const DiscreteOperator op = assemble_1d(profile(cfg), fine);
    const ProblemSpec spec = make_problem(cfg, project_to_mesh(op, w), project_to_mesh(op, y), project_to_mesh(op, f));
    out.emplace_back(std::numbers::pi / fine.n_el(), phi0_of(spec, op));
  }
  return out;
}

ConvergenceResult run_convergence(const RunConfig& cfg, bool write, std::ostream* log) {
  ConvergenceResult res;
  const long double t = cfg.horizon;
  const SymbolExpr denom = SymbolExpr::exp(2 * t) + SymbolExpr::constant(cfg.alpha) +
                           cfg.beta * SymbolExpr::segment_integral(cfg.beta_begin * t, cfg.beta_end * t, 2);
  const SymbolExpr quotient = SymbolExpr::exp(2 * t) / denom;  // mu = 1
  for (int d : cfg.fit_degrees) {
    res.fit_reports.push_back(fit_rational(quotient, d, 1e-30).report);
    res.exp_reports.push_back(fit_rational(SymbolExpr::exp(1), d, 1e-30).report);
  }
  for (int n : cfg.contour_counts) {
    res.contour.emplace_back(n, static_cast<double>(sampled_error(contour_exp(n, 1.0), SymbolExpr::exp(1))));
  }
  res.refinement = refinement_study(cfg);
  if (log) {
    for (std::size_t i = 0; i < res.fit_reports.size(); ++i) {
      *log << "degree " << cfg.fit_degrees[i] << ": quotient error " << static_cast<double>(res.fit_reports[i].max_error)
           << ", exp error " << static_cast<double>(res.exp_reports[i].max_error) << '\n';
    }
    for (const auto& [n, e] : res.contour) *log << "contour n = " << n << ": error " << e << '\n';
    for (const auto& [h, p] : res.refinement) *log << "h = " << h << ": Phi(0) = " << p << '\n';
  }
  if (write) {
    {
      auto os = open_csv(cfg, "fit_degree.csv");
      os << "symbol,requested_degree,degree,error,norm,tol\n";
      for (std::size_t i = 0; i < res.fit_reports.size(); ++i) {
        for (const auto& [name, rep] : {std::pair{"quotient", res.fit_reports[i]}, std::pair{"exp", res.exp_reports[i]}}) {
          os << name << ',' << cfg.fit_degrees[i] << ',' << rep.degree << ',' << static_cast<double>(rep.max_error)
             << ',' << static_cast<double>(rep.norm) << ',' << rep.tol << '\n';
        }
      }
    }
    {
      auto os = open_csv(cfg, "contour.csv");
      os << "n,error\n";
      for (const auto& [n, e] : res.contour) os << n << ',' << e << '\n';
    }
    {
      auto os = open_csv(cfg, "refinement.csv");
      os << "h,phi0\n";
      for (const auto& [h, p] : res.refinement) os << h << ',' << p << '\n';
    }
    write_sidecar(cfg, "fit_degree.csv", {{"quotient_symbol", quotient.key()}, {"mu", 1.0}});
    write_sidecar(cfg, "contour.csv", {{"t", 1.0}});
    write_sidecar(cfg, "refinement.csv", nlohmann::json::object());
  }
  return res;
}

double phi0_constant(const SensitivityRow& r) { return r.nu > 0 ? std::abs(r.phi0_delta - r.phi0) / r.nu : 0.0; }

std::vector<SensitivityRow> run_sensitivity(const RunConfig& cfg, bool write, std::ostream* log) {
  const DiscreteOperator op = build_operator(cfg);
  const ProblemSpec spec = build_problem(cfg, op);
  const double eps = cfg.sensitivity_eps_fraction * phi0_of(spec, op);
  std::vector<SensitivityRow> all;
  for (const auto& name : cfg.channels) {
    const Channel ch = parse_channel(name);
    const auto t0 = Clock::now();
    auto rows = sensitivity_sweep(spec, op, ch, cfg.nus, cfg.seed, eps);
    const double secs = seconds_since(t0);
    if (log) {
      for (const auto& r : rows) {
        *log << name << " nu = " << r.nu << ": drift " << r.drift << ", ratio " << r.ratio << ", mu " << r.mu_eps
             << " -> " << r.mu_eps_delta << ", |dPhi(0)|/nu " << phi0_constant(r)
             << (r.ok ? "" : "  FAILED: " + r.error) << '\n';
      }
    }
    if (write) {
      auto os = open_csv(cfg, "sensitivity_" + name + ".csv");
      write_sensitivity_csv(os, rows);
      nlohmann::json constants = nlohmann::json::array();
      for (const auto& r : rows) constants.push_back({{"nu", r.nu}, {"phi0_change_over_nu", phi0_constant(r)}});
      write_sidecar(cfg, "sensitivity_" + name + ".csv",
                    {{"eps", eps}, {"phi0", rows.empty() ? 0.0 : rows.front().phi0},
                     {"phi0_constants", constants}, {"timing_seconds", secs}});
    }
    all.insert(all.end(), rows.begin(), rows.end());
  }
  return all;
}

OracleCheckResult run_oracle_check(const RunConfig& cfg, bool write, std::ostream* log) {
  const DiscreteOperator op = build_operator(cfg);
  ProblemSpec spec = build_problem(cfg, op);
  const OracleControl oracle(spec, op);
  OracleCheckResult res;
  res.phi0_oracle = oracle.phi(0.0);
  spec.epsilon = cfg.eps_fractions.front() * res.phi0_oracle;
  const ControlSolution ref = oracle.solve(spec.epsilon);
  ControlSolver solver(op, homogenize(spec, op));
  res.phi0 = solver.phi(0.0);
  const ControlSolution sol = solver.solve(spec, spec.epsilon);
  res.mu = sol.mu;
  res.mu_oracle = ref.mu;
  res.mu_rel = ref.mu > 0 ? std::abs(sol.mu - ref.mu) / ref.mu : std::abs(sol.mu);
  res.u_rel = norm_m(op, sol.u - ref.u) / std::max(norm_m(op, ref.u), 1e-300);
  res.cost_rel = std::abs(sol.cost - ref.cost) / std::max(std::abs(ref.cost), 1e-300);
  if (log) {
    *log << "Phi(0): rational " << res.phi0 << ", oracle " << res.phi0_oracle << "\nmu: rational " << res.mu
         << ", oracle " << res.mu_oracle << " (rel " << res.mu_rel << ")\nu rel error " << res.u_rel
         << ", J rel error " << res.cost_rel << '\n';
  }
  if (write) {
    auto os = open_csv(cfg, "oracle_check.csv");
    os << "quantity,rational,oracle,relative_difference\n";
    os << "phi0," << res.phi0 << ',' << res.phi0_oracle << ','
       << std::abs(res.phi0 - res.phi0_oracle) / res.phi0_oracle << '\n';
    os << "mu," << res.mu << ',' << res.mu_oracle << ',' << res.mu_rel << '\n';
    os << "cost," << sol.cost << ',' << ref.cost << ',' << res.cost_rel << '\n';
    os << "u,,," << res.u_rel << '\n';
    write_sidecar(cfg, "oracle_check.csv", {{"dimension", op.dim()}, {"eps", spec.epsilon}});
  }
  return res;
}

}  // namespace parctl
