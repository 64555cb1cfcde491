#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "parctl/projection.hpp"

namespace parctl {

/// Parameters of one CLI run. Loaded from an INI file; every key is optional
/// and defaults reproduce the 1D isotropic example. See configs/README.md for
/// the schema.
struct RunConfig {
  std::string name = "example1d";

  // [mesh]
  int dimension = 1;
  double h = 1.0 / 20.0;
  int n_el = 0;  // 1D only; 0 means ceil(pi / h)
  double diffusion_jump = 0.0;  // coefficient 1 + a chi_[interface, pi]
  double interface = 2.2;

  // [problem]
  double horizon = 0.01;
  double alpha = 1e-4;
  double beta = 1.0;
  double beta_begin = 1.0 / 3.0;  // fractions of T
  double beta_end = 2.0 / 3.0;
  std::string w = "interval:0.2pi,0.4pi";
  std::string ystar = "interval:0.6pi,0.8pi";
  std::string f = "zero";
  std::vector<double> eps_fractions{0.2, 0.5, 0.9};

  // [phi_curve]
  int phi_points = 350;
  double phi_mu_min = 1e-6;
  double phi_mu_max = 1e12;

  // [sensitivity]
  std::vector<double> nus{1e-2, 1e-3, 1e-4};
  double sensitivity_eps_fraction = 0.5;
  std::vector<std::string> channels{"alpha", "beta", "w", "ystar", "f", "operator", "diffusion"};

  // [convergence]
  std::vector<int> fit_degrees{4, 6, 8, 10, 12};
  std::vector<int> contour_counts{8, 10, 12, 14, 16, 18, 20, 22, 24};
  int refinements = 3;
  double refinement_h = 0.0;  // mesh size of the coarsest refinement level; 0 means `h`

  // [output]
  std::string output_dir = "out";

  // [run]
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Defaults of the 2D L-shape example (h = 1/30, T = 1/20, l1-ball trajectory
/// target, three Gaussians as final target).
RunConfig lshape_defaults();

/// Reads an INI file on top of `base`. Throws ConfigError on unreadable
/// files, unknown keys and invalid values.
RunConfig load_config(const std::string& path, RunConfig base = {});
void validate(const RunConfig& cfg);

/// Descriptor syntax:
///   zero | constant:c | interval:a,b | l1ball:cx,cy,r |
///   gaussian:cx,cy,rate,amplitude[;cx,cy,rate,amplitude...]
/// Numbers may carry a "pi" suffix (0.2pi = 0.2 * pi).
FieldDescriptor parse_descriptor(const std::string& text);
double parse_number(const std::string& text);

}  // namespace parctl
