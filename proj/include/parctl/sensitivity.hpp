#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parctl/control.hpp"

namespace parctl {

/// Perturbed datum. `diffusion` scales the whole stiffness by (1 + nu), a
/// relatively bounded operator perturbation; `op` adds nu * D with D diagonal,
/// entries in (-1, 1), a bounded one.
enum class Channel { alpha, beta, w, ystar, f, op, diffusion };

std::string channel_name(Channel c);
/// Accepts the names produced by channel_name ("operator" for Channel::op).
Channel parse_channel(const std::string& name);
const std::vector<Channel>& all_channels();

struct PerturbationSpec {
  double nu = 0.0;
  Channel channel = Channel::alpha;
  std::uint64_t seed = 0;
  /// For ystar: draw the direction M-orthogonal to y*.
  bool orthogonal = false;
};

struct PerturbedProblem {
  ProblemSpec spec;
  DiscreteOperator op;
};

/// Only the selected channel differs. Scalar channels are scaled so the
/// perturbed data stay admissible: delta alpha = nu * alpha, beta + delta beta
/// is clipped at 0. Vector directions have unit M-norm per segment.
PerturbedProblem perturb(const ProblemSpec& spec, const DiscreteOperator& op, const PerturbationSpec& p);

struct SensitivityRow {
  Channel channel = Channel::alpha;
  double nu = 0.0;
  double drift = 0.0;  // ||u_delta - u||_M
  double ratio = 0.0;  // drift / nu
  double mu_eps = 0.0;
  double mu_eps_delta = 0.0;
  double phi0 = 0.0;
  double phi0_delta = 0.0;
  bool ok = true;
  std::string error;
};

/// Solves the base problem once and each perturbed problem at the same eps.
/// Failed rows are flagged and the sweep continues.
std::vector<SensitivityRow> sensitivity_sweep(const ProblemSpec& spec, const DiscreteOperator& op, Channel channel,
                                              const std::vector<double>& nus, std::uint64_t seed, double eps,
                                              bool orthogonal = false);

/// "channel,nu,drift,ratio,mu_eps,mu_eps_delta" plus a status column.
void write_sensitivity_csv(std::ostream& os, const std::vector<SensitivityRow>& rows, bool header = true);

}  // namespace parctl
