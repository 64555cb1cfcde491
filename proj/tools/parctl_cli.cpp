#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "parctl/errors.hpp"
#include "parctl/experiments.hpp"

namespace {

void error_line(const std::string& code, const std::string& message) {
  std::string escaped;
  for (char c : message) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c == '\n' ? ' ' : c;
  }
  std::cerr << "error: code=" << code << " message=\"" << escaped << "\"\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Initial-condition optimal control of parabolic problems by rational operator calculus"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
  app.add_option("--seed", seed, "seed for random perturbation directions (overrides [run] seed)");
  app.add_option("--threads", threads, "worker threads for Phi sweeps (overrides [run] threads)")
      ->check(CLI::PositiveNumber);

  auto* ex1 = app.add_subcommand("example1d", "1D heat equation example (isotropic or discontinuous diffusion)");
  auto* ex2 = app.add_subcommand("example2d", "2D L-shape example");
  auto* phi = app.add_subcommand("phi-curve", "sample Phi(mu) on a log grid");
  auto* conv = app.add_subcommand("convergence", "fit degree, contour count and mesh refinement studies");
  auto* sens = app.add_subcommand("sensitivity", "perturbation sweeps over all data channels");
  auto* orc = app.add_subcommand("oracle-check", "rational path against the dense eigendecomposition");
  for (auto* sub : {ex1, ex2, phi, conv, sens, orc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    error_line("usage", e.what());
    return 2;
  }

  try {
    parctl::RunConfig base = ex2->parsed() ? parctl::lshape_defaults() : parctl::RunConfig{};
    parctl::RunConfig cfg = config_path.empty() ? base : parctl::load_config(config_path, base);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (app.count("--seed")) cfg.seed = seed;
    if (threads > 0) cfg.threads = threads;
    if (ex2->parsed()) cfg.dimension = 2;
    parctl::validate(cfg);

    std::cout.precision(10);
    if (ex1->parsed() || ex2->parsed()) {
      const auto res = parctl::run_example(cfg, ex1->parsed(), true, &std::cout);
      for (const auto& r : res.runs) {
        if (r.solution.miss > r.solution.epsilon + 1e-6 * res.phi0) {
          error_line("infeasible", "final state misses the target ball at eps fraction " + std::to_string(r.fraction));
          return 3;
        }
      }
    } else if (phi->parsed()) {
      const auto res = parctl::run_phi_curve(cfg, true, &std::cout);
      if (res.violations > 0) {
        error_line("non_monotone", std::to_string(res.violations) + " Phi samples fail to decrease");
        return 3;
      }
    } else if (conv->parsed()) {
      parctl::run_convergence(cfg, true, &std::cout);
    } else if (sens->parsed()) {
      for (const auto& row : parctl::run_sensitivity(cfg, true, &std::cout)) {
        if (!row.ok) {
          error_line("sweep_row_failed", parctl::channel_name(row.channel) + ": " + row.error);
          return 3;
        }
      }
    } else if (orc->parsed()) {
      parctl::run_oracle_check(cfg, true, &std::cout);
    }
    std::cout << "artifacts written to " << cfg.output_dir << '\n';
  } catch (const parctl::Error& e) {
    error_line(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("internal", e.what());
    return 1;
  }
  return 0;
}
