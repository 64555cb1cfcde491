#pragma once

#include <vector>

#include "parctl/discrete_operator.hpp"

namespace parctl {

/// One piece (begin, end] of the piecewise-constant time data: trajectory
/// weight beta, desired state w and source f. Empty w or f means zero.
struct TimeSegment {
  double begin = 0.0;
  double end = 0.0;
  double beta = 0.0;
  MeshFunction w;
  MeshFunction f;

  double length() const { return end - begin; }
};

struct ProblemSpec {
  double horizon = 0.0;  // T
  double alpha = 0.0;
  std::vector<TimeSegment> segments;  // partition of [0, T]
  MeshFunction ystar;
  double epsilon = 0.0;

  bool has_source() const;
  /// Throws InvalidArgument / DimensionMismatch describing the first violation.
  void validate(int dim) const;

  /// Segment values with empty vectors replaced by zeros of length `dim`.
  MeshFunction w_of(std::size_t segment, int dim) const;
  MeshFunction f_of(std::size_t segment, int dim) const;
};

/// Three segments [0, a], (a, b], (b, T] with beta = chi_(a, b] * beta_value and
/// the same w and f on every segment.
std::vector<TimeSegment> window_segments(double horizon, double a, double b, double beta_value,
                                         const MeshFunction& w, const MeshFunction& f = {});

}  // namespace parctl
