#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "parctl/discrete_operator.hpp"

namespace parctl {

/// chi_[a, b] on the 1D domain.
struct IntervalIndicator {
  double a = 0.0;
  double b = 0.0;
};

/// chi_{||x - center||_1 <= radius} on the 2D domain.
struct L1BallIndicator {
  Point2 center{0.0, 0.0};
  double radius = 0.0;
};

/// sum_k amplitude_k * exp(-rate_k ||x - center_k||^2). In 1D only center[0] is used.
struct GaussianSum {
  struct Bump {
    Point2 center{0.0, 0.0};
    double rate = 1.0;
    double amplitude = 1.0;
  };
  std::vector<Bump> bumps;
};

/// Continuous piecewise-linear function on a 1D node set (used to carry data
/// from a coarse mesh onto nested refinements unchanged).
struct PiecewiseLinear1D {
  std::vector<double> nodes;
  std::vector<double> values;
};

struct PointwiseFunction {
  std::function<double(const Point2&)> f;
};

/// Already-discrete coefficient vector, passed through after a size check.
struct SampledValues {
  MeshFunction values;
};

using FieldDescriptor = std::variant<IntervalIndicator, L1BallIndicator, GaussianSum,
                                     PiecewiseLinear1D, PointwiseFunction, SampledValues>;

enum class ProjectionMode {
  /// Indicators use the lumped L2 projection, everything else nodal values.
  automatic,
  /// Value at each interior node.
  nodal,
  /// (int chi phi_i) / M_i, exact for indicator descriptors.
  lumped_l2,
};

MeshFunction project_to_mesh(const DiscreteOperator& op, const FieldDescriptor& descriptor,
                             ProjectionMode mode = ProjectionMode::automatic);

/// Pointwise evaluation of a descriptor (SampledValues is not pointwise and throws).
double evaluate_descriptor(const FieldDescriptor& descriptor, const Point2& x);

/// M-weighted mass fraction of `v` inside the l1 ball: sum_{i in ball} M_i v_i^2 / ||v||_M^2.
double mass_fraction_inside(const DiscreteOperator& op, const MeshFunction& v, const L1BallIndicator& ball);

}  // namespace parctl
